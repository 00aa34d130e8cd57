//! Hand-written SVG scatter of localizer eigenvalues.
//!
//! Eigenvalues are drawn in ascending order against their rank. Negative ones
//! are blue, positive ones red; the `|signature|` eigenvalues of the majority
//! sign closest to zero (the surplus) are drawn as larger diamonds.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

pub fn eigenvalue_svg(eigs: &[f64], tau: f64, title: &str) -> String {
    let n_plus = eigs.iter().filter(|&&l| l > tau).count();
    let n_minus = eigs.iter().filter(|&&l| l < -tau).count();
    let surplus = n_plus.abs_diff(n_minus);
    let surplus_idx: Vec<usize> = if n_plus > n_minus {
        let first = eigs.iter().position(|&l| l > tau).unwrap_or(0);
        (first..first + surplus).collect()
    } else {
        let last = eigs.iter().rposition(|&l| l < -tau).unwrap_or(0);
        (last + 1 - surplus..=last).collect()
    };

    let ymax = eigs.iter().fold(1e-12_f64, |m, l| m.max(l.abs())) * 1.1;
    let count = eigs.len().max(2);
    let sx = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / (count - 1) as f64;
    let sy = |v: f64| H / 2.0 - (H / 2.0 - PAD) * v / ymax;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{y0:.2}" x2="{x1}" y2="{y0:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        y0 = sy(0.0),
        x1 = W - PAD
    );
    let _ = writeln!(s, r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#, H - PAD);
    for v in [-ymax / 1.1, ymax / 1.1] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.3}</text>"#,
            PAD - 4.0,
            sy(v) + 3.0
        );
    }
    for (i, &l) in eigs.iter().enumerate() {
        let (x, y) = (sx(i), sy(l));
        let color = if l > tau {
            "#c0392b"
        } else if l < -tau {
            "#2c5aa0"
        } else {
            "#7f7f7f"
        };
        if surplus_idx.contains(&i) {
            let r = 7.0;
            let _ = writeln!(
                s,
                r#"<polygon class="surplus" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}" stroke="black"/>"#,
                x, y - r, x + r, y, x, y + r, x - r, y
            );
        } else {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#);
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">negative: {n_minus}   positive: {n_plus}   signature: {}</text>"#,
        W / 2.0,
        H - 14.0,
        n_plus as i64 - n_minus as i64
    );
    s.push_str("</svg>\n");
    s
}

pub fn eigenvalue_csv(eigs: &[f64]) -> String {
    let mut s = String::from("eigenvalue\n");
    for l in eigs {
        let _ = writeln!(s, "{l:e}");
    }
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
