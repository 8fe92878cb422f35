//! Static SVG figures for evaluation results: actual-versus-estimated
//! scatter plots with an identity line, grouped bar charts for discrete
//! subscales, and feature-importance bars. Every figure carries its numbers
//! as `data-*` attributes and ships with a sibling CSV so the plotted
//! values stay machine-checkable.

use thiserror::Error;

use crate::indices::ImportanceTable;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("empty input: nothing to plot")]
    EmptyInput,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.06 * (hi - lo);
    (lo - pad, hi + pad)
}

fn svg_header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" ",
            "font-family=\"sans-serif\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        cx = WIDTH / 2.0,
        title = title
    )
}

/// Scatter of actual versus estimated values with the identity line and
/// per-point subject labels. Returns (svg, csv).
pub fn scatter_plot(
    title: &str,
    pairs: &[(String, f64, f64)],
) -> Result<(String, String), ReportError> {
    if pairs.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let (lo, hi) = axis_range(pairs.iter().flat_map(|(_, a, e)| [*a, *e]));
    let span = hi - lo;
    let to_x = |v: f64| MARGIN + (v - lo) / span * (WIDTH - 2.0 * MARGIN);
    let to_y = |v: f64| HEIGHT - MARGIN - (v - lo) / span * (HEIGHT - 2.0 * MARGIN);

    let mut svg = svg_header(title);
    // axes + identity line
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <line x1=\"{ix0}\" y1=\"{iy0}\" x2=\"{ix1}\" y2=\"{iy1}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
        x0 = MARGIN,
        y0 = HEIGHT - MARGIN,
        x1 = WIDTH - MARGIN,
        y1 = MARGIN,
        ix0 = to_x(lo),
        iy0 = to_y(lo),
        ix1 = to_x(hi),
        iy1 = to_y(hi),
    ));
    svg.push_str(&format!(
        "<text x=\"{cx}\" y=\"{by}\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">actual</text>\n\
         <text x=\"16\" y=\"{cy}\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {cy})\">estimated</text>\n",
        cx = WIDTH / 2.0,
        by = HEIGHT - 16.0,
        cy = HEIGHT / 2.0,
    ));

    // ticks at the range ends
    for v in [lo, hi] {
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">{v:.1}</text>\n",
            x = to_x(v),
            y = HEIGHT - MARGIN + 16.0,
        ));
    }

    let mut csv = String::from("subject_id,actual,estimated\n");
    for (subject, actual, estimated) in pairs {
        svg.push_str(&format!(
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"4\" fill=\"steelblue\" data-subject=\"{subject}\" data-actual=\"{actual}\" data-estimated=\"{estimated}\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\" font-size=\"9\" font-family=\"sans-serif\">{subject}</text>\n",
            cx = to_x(*actual),
            cy = to_y(*estimated),
            tx = to_x(*actual) + 6.0,
            ty = to_y(*estimated) - 4.0,
        ));
        csv.push_str(&format!("{subject},{actual},{estimated}\n"));
    }
    svg.push_str("</svg>\n");
    Ok((svg, csv))
}

/// Grouped actual/estimated bars per subject, for subscales with few
/// discrete levels. Returns (svg, csv).
pub fn grouped_bar_plot(
    title: &str,
    pairs: &[(String, f64, f64)],
) -> Result<(String, String), ReportError> {
    if pairs.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let (lo, hi) = axis_range(pairs.iter().flat_map(|(_, a, e)| [*a, *e, 0.0]));
    let span = hi - lo;
    let to_y = |v: f64| HEIGHT - MARGIN - (v - lo) / span * (HEIGHT - 2.0 * MARGIN);
    let group_width = (WIDTH - 2.0 * MARGIN) / pairs.len() as f64;
    let bar_width = (group_width * 0.38).min(24.0);

    let mut svg = svg_header(title);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"black\"/>\n",
        x0 = MARGIN,
        x1 = WIDTH - MARGIN,
        y = to_y(0.0_f64.clamp(lo, hi)),
    ));

    let mut csv = String::from("subject_id,actual,estimated\n");
    let zero_y = to_y(0.0_f64.clamp(lo, hi));
    for (i, (subject, actual, estimated)) in pairs.iter().enumerate() {
        let gx = MARGIN + i as f64 * group_width + group_width / 2.0;
        for (offset, value, fill, kind) in [
            (-bar_width, *actual, "steelblue", "actual"),
            (0.0, *estimated, "darkorange", "estimated"),
        ] {
            let vy = to_y(value);
            let (top, height) = if vy < zero_y {
                (vy, zero_y - vy)
            } else {
                (zero_y, vy - zero_y)
            };
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{top}\" width=\"{bar_width}\" height=\"{height}\" fill=\"{fill}\" data-subject=\"{subject}\" data-kind=\"{kind}\" data-value=\"{value}\"/>\n",
                x = gx + offset,
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{gx}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"8\" font-family=\"sans-serif\">{subject}</text>\n",
            y = HEIGHT - MARGIN + 12.0,
        ));
        csv.push_str(&format!("{subject},{actual},{estimated}\n"));
    }
    svg.push_str("</svg>\n");
    Ok((svg, csv))
}

/// Horizontal feature-importance bars, one group per model, features with
/// any nonzero importance only. Returns (svg, csv).
pub fn importance_plot(table: &ImportanceTable) -> Result<(String, String), ReportError> {
    if table.rows.is_empty() || table.models.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let active: Vec<_> = table
        .rows
        .iter()
        .filter(|(_, values)| values.iter().any(|&v| v != 0.0))
        .collect();
    if active.is_empty() {
        // Zero spread everywhere is a valid (if boring) result.
        let mut svg = svg_header("Feature importance");
        svg.push_str(&format!(
            "<text x=\"{cx}\" y=\"{cy}\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">all importances are zero</text>\n</svg>\n",
            cx = WIDTH / 2.0,
            cy = HEIGHT / 2.0,
        ));
        return Ok((svg, table.to_csv()));
    }
    let max_value = active
        .iter()
        .flat_map(|(_, values)| values.iter().copied())
        .fold(0.0_f64, f64::max)
        .max(1e-12);

    let row_height = 14.0;
    let height = 2.0 * MARGIN + active.len() as f64 * row_height * table.models.len() as f64;
    let mut svg = format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" ",
            "font-family=\"sans-serif\">Feature importance</text>\n"
        ),
        w = WIDTH,
        h = height,
        cx = WIDTH / 2.0,
    );

    let palette = ["steelblue", "darkorange", "seagreen", "indianred", "slategray"];
    let mut csv = String::from("feature,model,importance\n");
    let mut y = MARGIN;
    for (key, values) in &active {
        for (m, &value) in values.iter().enumerate() {
            let bar = value / max_value * (WIDTH - 2.0 * MARGIN - 80.0);
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{bar}\" height=\"{bh}\" fill=\"{fill}\" data-feature=\"{key}\" data-model=\"{model}\" data-value=\"{value}\"/>\n",
                x = MARGIN + 80.0,
                bh = row_height - 4.0,
                fill = palette[m % palette.len()],
                model = table.models[m],
            ));
            csv.push_str(&format!("{key},{},{value}\n", table.models[m]));
            y += row_height;
        }
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{ty}\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">{key}</text>\n",
            x = MARGIN + 72.0,
            ty = y - row_height * values.len() as f64 / 2.0,
        ));
    }
    svg.push_str("</svg>\n");
    Ok((svg, csv))
}

/// Pull the `data-*` numeric payload back out of a generated SVG — the
/// cross-check that figures and their CSVs agree.
pub fn parse_scatter_data(svg: &str) -> Vec<(String, f64, f64)> {
    let mut out = Vec::new();
    for line in svg.lines() {
        if !line.starts_with("<circle") {
            continue;
        }
        let grab = |attr: &str| -> Option<String> {
            let pat = format!("{attr}=\"");
            let start = line.find(&pat)? + pat.len();
            let end = line[start..].find('"')? + start;
            Some(line[start..end].to_string())
        };
        if let (Some(subject), Some(actual), Some(estimated)) = (
            grab("data-subject"),
            grab("data-actual"),
            grab("data-estimated"),
        ) {
            if let (Ok(a), Ok(e)) = (actual.parse(), estimated.parse()) {
                out.push((subject, a, e));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(n: usize) -> Vec<(String, f64, f64)> {
        (0..n)
            .map(|i| {
                (
                    format!("s{i:02}"),
                    50.0 + i as f64 * 2.0,
                    51.0 + i as f64 * 1.9,
                )
            })
            .collect()
    }

    #[test]
    fn scatter_has_one_point_per_pair_and_identity_line() {
        let data = pairs(27);
        let (svg, csv) = scatter_plot("NavigationOrientation", &data).unwrap();
        assert_eq!(svg.matches("<circle").count(), 27);
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(csv.lines().count(), 28);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            scatter_plot("x", &[]).unwrap_err(),
            ReportError::EmptyInput
        ));
        assert!(matches!(
            grouped_bar_plot("x", &[]).unwrap_err(),
            ReportError::EmptyInput
        ));
    }

    #[test]
    fn svg_data_matches_sibling_csv() {
        let data = pairs(12);
        let (svg, csv) = scatter_plot("PathRoute", &data).unwrap();
        let parsed = parse_scatter_data(&svg);
        assert_eq!(parsed.len(), data.len());
        for ((ps, pa, pe), line) in parsed.iter().zip(csv.lines().skip(1)) {
            let mut fields = line.split(',');
            assert_eq!(ps, fields.next().unwrap());
            assert_eq!(*pa, fields.next().unwrap().parse::<f64>().unwrap());
            assert_eq!(*pe, fields.next().unwrap().parse::<f64>().unwrap());
        }
    }

    #[test]
    fn bar_plot_emits_two_bars_per_subject() {
        let data = pairs(8);
        let (svg, csv) = grouped_bar_plot("LandmarkRecognition", &data).unwrap();
        assert_eq!(svg.matches("<rect").count() - 1, 16); // minus background
        assert_eq!(csv.lines().count(), 9);
    }
}
