//! Log-log plots of Hausdorff distance against iteration.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub struct Curve {
    pub label: String,
    /// Monotone envelope, indexed from k = 1.
    pub envelope: Vec<f64>,
    /// Fitted `lambda * k^(-c/(q-1))`, when available.
    pub fit: Option<(f64, f64, usize)>,
}

fn decade_range(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.log10().floor();
    let b = hi.log10().ceil();
    if b > a {
        (a, b)
    } else {
        (a, a + 1.0)
    }
}

pub fn render(title: &str, curves: &[Curve]) -> String {
    let positive = |v: &&f64| v.is_finite() && **v > 0.0;
    let kmax = curves.iter().map(|c| c.envelope.len()).max().unwrap_or(1).max(2) as f64;
    let ymin = curves.iter().flat_map(|c| c.envelope.iter().filter(positive)).cloned().fold(f64::INFINITY, f64::min);
    let ymax = curves.iter().flat_map(|c| c.envelope.iter().filter(positive)).cloned().fold(0.0, f64::max);
    let (ymin, ymax) = if ymin.is_finite() && ymax > 0.0 { (ymin, ymax) } else { (0.1, 1.0) };
    let (xa, xb) = decade_range(1.0, kmax);
    let (ya, yb) = decade_range(ymin, ymax);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |k: f64| LEFT + (k.log10() - xa) / (xb - xa) * pw;
    let sy = |y: f64| TOP + (yb - y.log10()) / (yb - ya) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for d in xa as i32..=xb as i32 {
        let x = sx(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, TOP + ph + 18.0);
    }
    for d in ya as i32..=yb as i32 {
        let y = sy(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration k</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">Hausdorff distance</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (idx, c) in curves.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let pts: Vec<String> = c
            .envelope
            .iter()
            .enumerate()
            .filter(|(_, v)| positive(v))
            .map(|(i, &v)| format!("{:.2},{:.2}", sx((i + 1) as f64), sy(v)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        if let Some((lambda, c_hat, q)) = c.fit {
            if lambda.is_finite() && c_hat.is_finite() && lambda > 0.0 {
                let e = -c_hat / (q as f64 - 1.0);
                let pts: Vec<String> = (0..=40)
                    .map(|t| 10f64.powf(xa + (xb - xa) * t as f64 / 40.0))
                    .map(|k| (k, lambda * k.powf(e)))
                    .filter(|&(_, y)| y.log10() >= ya && y.log10() <= yb)
                    .map(|(k, y)| format!("{:.2},{:.2}", sx(k), sy(y)))
                    .collect();
                if pts.len() > 1 {
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1" stroke-dasharray="6 4" points="{}"/>"#,
                        pts.join(" ")
                    );
                }
            }
        }
        let ly = TOP + 16.0 + 18.0 * idx as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&c.label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_envelope_and_fit() {
        let env: Vec<f64> = (1..=50).map(|k| 2.0 / k as f64).collect();
        let svg = render("t", &[Curve { label: "p = 2".into(), envelope: env, fit: Some((2.0, 1.0, 2)) }]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("1e-2") && svg.contains("1e1"));
    }

    #[test]
    fn empty_input_still_valid() {
        let svg = render("none", &[]);
        assert!(svg.contains("</svg>"));
    }
}
