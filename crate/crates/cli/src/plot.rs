//! Minimal SVG scatter plot of canonical height against Weil height.

use std::fmt::Write;

use arakelov_core::census::CensusRow;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

pub fn census_svg(rows: &[CensusRow], threshold: f64) -> String {
    let xmax = rows.iter().map(|r| r.weil_h).fold(1e-9, f64::max);
    let ymax = rows.iter().map(|r| r.hhat.value).fold(threshold.max(1e-9), f64::max);
    let sx = |x: f64| MARGIN + x / xmax * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - y / ymax * (H - 2.0 * MARGIN);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN, MARGIN);
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">Weil height h(x)</text>"#, W / 2.0, H - 16.0).unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">canonical height</text>"#,
        H / 2.0,
        H / 2.0
    )
    .unwrap();
    writeln!(s, r#"<text x="{x0}" y="{}" font-size="11">0</text>"#, y0 + 14.0).unwrap();
    writeln!(s, r#"<text x="{x1}" y="{}" font-size="11" text-anchor="end">{}</text>"#, y0 + 14.0, fmt(xmax)).unwrap();
    writeln!(s, r#"<text x="{}" y="{y1}" font-size="11" text-anchor="end">{}</text>"#, x0 - 4.0, fmt(ymax)).unwrap();
    if threshold > 0.0 {
        let ty = fmt(sy(threshold));
        writeln!(s, r#"<line x1="{x0}" y1="{ty}" x2="{x1}" y2="{ty}" stroke="gray" stroke-dasharray="4 3"/>"#).unwrap();
    }
    for r in rows {
        let colour = if r.preperiodic() { "crimson" } else if r.below_threshold { "darkorange" } else { "steelblue" };
        writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="2.5" fill="{colour}"><title>{} {}</title></circle>"#,
            fmt(sx(r.weil_h)),
            fmt(sy(r.hhat.value)),
            r.point,
            r.hhat.value
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
