use std::fmt::Write;

use super::SweepOutput;

/// A gnuplot script drawing the output's y column against its x column,
/// one curve per distinct value of the grouping columns. It reads
/// `csv_name` at plot time and embeds no data.
pub fn plot_script(output: &SweepOutput, csv_name: &str) -> String {
    let (x, y) = &output.plot_axes;
    let mut keys: Vec<Vec<String>> = Vec::new();
    let idx: Vec<usize> = output.plot_group.iter().filter_map(|g| output.table.column_index(g)).collect();
    for row in output.table.rows() {
        let key: Vec<String> = idx.iter().map(|&i| row[i].clone()).collect();
        if !keys.contains(&key) {
            keys.push(key);
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{x}'");
    let _ = writeln!(s, "set ylabel '{y}'");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "file = '{csv_name}'");
    if keys.len() <= 1 || idx.is_empty() {
        let _ = writeln!(s, "plot file using (column('{x}')):(column('{y}')) with linespoints title '{y}'");
        return s;
    }
    let curves: Vec<String> = keys
        .iter()
        .map(|key| {
            let cond: Vec<String> = output
                .plot_group
                .iter()
                .zip(key)
                .map(|(g, v)| format!("column('{g}') == {v}"))
                .collect();
            let title: Vec<String> = output.plot_group.iter().zip(key).map(|(g, v)| format!("{g}={v}")).collect();
            format!(
                "file using (column('{x}')):(({}) ? column('{y}') : 1/0) with linespoints title '{}'",
                cond.join(" && "),
                title.join(" ")
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::CsvTable;

    #[test]
    fn script_references_csv_only() {
        let mut t = CsvTable::new(&["n", "np", "success_rate"]);
        t.push(vec!["100".into(), "3".into(), "0.25".into()]);
        t.push(vec!["200".into(), "3".into(), "0.75".into()]);
        let out = SweepOutput {
            table: t,
            summary: None,
            plot_axes: ("np".into(), "success_rate".into()),
            plot_group: vec!["n".into()],
        };
        let s = plot_script(&out, "sweep.csv");
        assert!(s.contains("file = 'sweep.csv'"));
        assert!(s.contains("column('n') == 200"));
        assert!(!s.contains("0.75"));
        assert_eq!(s, plot_script(&out, "sweep.csv"));
    }
}
