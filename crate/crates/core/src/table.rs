use unicode_width::UnicodeWidthStr;

/// Renders rows as left-aligned columns separated by two spaces. Widths are
/// display widths, so CJK terms line up in a terminal.
pub(crate) fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let n_cols = rows.iter().map(Vec::len).chain([header.len()]).max().unwrap_or(0);
    let mut widths = vec![0; n_cols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(UnicodeWidthStr::width(cell.as_str()));
        }
    }
    let line = |row: &[String]| {
        let mut s = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i + 1 == row.len() {
                s.push_str(cell);
            } else {
                s.push_str(cell);
                let pad = widths[i] - UnicodeWidthStr::width(cell.as_str()) + 2;
                s.extend(std::iter::repeat_n(' ', pad));
            }
        }
        let mut s = s.trim_end().to_string();
        s.push('\n');
        s
    };
    let mut out = line(header);
    let rule: usize = widths.iter().sum::<usize>() + 2 * n_cols.saturating_sub(1);
    let sep = "-".repeat(rule);
    out.push_str(&sep);
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
    }
    out
}
