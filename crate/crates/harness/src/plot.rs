//! Static SVG plot of approximation error against `δ`.

use std::io::Read;

use crate::error::{HarnessError, Result};

/// `(delta, sup_err, bound)` triples read from a report CSV.
pub fn read_error_curve<R: Read>(input: R) -> Result<Vec<(f64, f64, f64)>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Config(format!("report lacks column `{name}`")))
    };
    let (d, e, b) = (
        col("delta")?,
        col("sup_err_approx_region")?,
        col("bound_omega_delta")?,
    );
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let num = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("`{}` is not a number", &record[i])))
        };
        points.push((num(d)?, num(e)?, num(b)?));
    }
    if points.is_empty() {
        return Err(HarnessError::Config("report has no rows".into()));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(points)
}

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

fn polyline(points: &[(f64, f64)], color: &str, dash: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Error (solid) and `ω(δ)` bound (dashed) against `δ`.
pub fn render_svg(points: &[(f64, f64, f64)]) -> String {
    let x_max = points.iter().map(|p| p.0).fold(0.0, f64::max).max(1e-12);
    let y_max = points
        .iter()
        .map(|p| p.1.max(p.2))
        .fold(0.0, f64::max)
        .max(1e-12);
    let sx = |x: f64| PAD + x / x_max * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / y_max * (H - 2.0 * PAD);
    let err: Vec<(f64, f64)> = points.iter().map(|p| (sx(p.0), sy(p.1))).collect();
    let bound: Vec<(f64, f64)> = points.iter().map(|p| (sx(p.0), sy(p.2))).collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{lx}\" text-anchor=\"middle\" font-size=\"12\">delta (max {x_max})</text>\n\
         <text x=\"12\" y=\"{PAD}\" font-size=\"12\">max {y_max:.4}</text>\n",
        b = H - PAD,
        r = W - PAD,
        cx = W / 2.0,
        lx = H - 12.0,
    );
    svg += &polyline(&bound, "gray", " stroke-dasharray=\"6 4\"");
    svg += &polyline(&err, "crimson", "");
    for (x, y) in &err {
        svg += &format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"crimson\"/>\n");
    }
    svg += "<text x=\"60\" y=\"20\" font-size=\"12\" fill=\"crimson\">sup error</text>\n";
    svg += "<text x=\"140\" y=\"20\" font-size=\"12\" fill=\"gray\">omega(delta)</text>\n</svg>\n";
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders() {
        let csv = "delta,delta_star,K,trifling_fraction,sup_err_approx_region,tail_moment_p,bound_omega_delta,bound_trifling\n\
                   0.4,0.2,3,0.1,0.3,0,0.4,0.1\n0.2,0.1,5,0.1,0.15,0,0.2,0.1\n";
        let pts = read_error_curve(csv.as_bytes()).unwrap();
        assert_eq!(pts[0], (0.2, 0.15, 0.2));
        let svg = render_svg(&pts);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn missing_column_is_config_error() {
        assert!(read_error_curve("a,b\n1,2\n".as_bytes()).is_err());
    }
}
