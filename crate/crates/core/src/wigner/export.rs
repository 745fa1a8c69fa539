use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;

use super::contour::ContourSet;
use super::PhaseSpaceDensity;
use crate::quantum::{QuantumState, TorusQuantization};

/// Writes `# config: {json}` as the first line.
pub fn write_config_header<W: Write, C: Serialize>(out: &mut W, config: &C) -> io::Result<()> {
    let json = serde_json::to_string(config).map_err(io::Error::other)?;
    writeln!(out, "# config: {json}")
}

/// `q,p,w` rows over the whole grid.
pub fn write_density_csv<W: Write>(out: &mut W, density: &PhaseSpaceDensity) -> io::Result<()> {
    writeln!(out, "q,p,w")?;
    for iq in 0..density.resolution.n_q {
        for ip in 0..density.resolution.n_p {
            writeln!(
                out,
                "{:.10},{:.10},{:.10e}",
                density.q(iq),
                density.p(ip),
                density.at(iq, ip)
            )?;
        }
    }
    Ok(())
}

/// `t,level,polyline,vertex,q,p` rows for contour sets labelled by step.
pub fn write_contours_csv<W: Write>(out: &mut W, sets: &[(usize, ContourSet)]) -> io::Result<()> {
    writeln!(out, "t,level,polyline,vertex,q,p")?;
    for (t, set) in sets {
        for (k, line) in set.polylines.iter().enumerate() {
            for (v, (q, p)) in line.points.iter().enumerate() {
                writeln!(out, "{t},{},{k},{v},{q:.10},{p:.10}", set.level.tag())?;
            }
        }
    }
    Ok(())
}

/// `j,q,re,im,abs` rows of a state's position amplitudes.
pub fn write_state_csv<W: Write>(
    out: &mut W,
    state: &QuantumState,
    tq: &TorusQuantization,
) -> io::Result<()> {
    writeln!(out, "j,q,re,im,abs")?;
    for (j, a) in state.amplitudes.iter().enumerate() {
        writeln!(
            out,
            "{j},{:.10},{:.12e},{:.12e},{:.12e}",
            tq.position(j),
            a.re,
            a.im,
            a.norm()
        )?;
    }
    Ok(())
}

/// One panel of an SVG figure.
pub struct Panel<'a> {
    pub label: String,
    pub density: &'a PhaseSpaceDensity,
    pub contours: &'a [ContourSet],
}

const PANEL: f64 = 220.0;
const MARGIN: f64 = 24.0;

/// Contour panels side by side; each panel spans its density window.
pub fn render_svg(panels: &[Panel<'_>]) -> String {
    let width = MARGIN + panels.len() as f64 * (PANEL + MARGIN);
    let height = PANEL + 2.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in panels.iter().enumerate() {
        let x0 = MARGIN + k as f64 * (PANEL + MARGIN);
        let y0 = MARGIN;
        let d = panel.density;
        let span_q = d.resolution.n_q as f64 * d.dq;
        let span_p = d.resolution.n_p as f64 * d.dp;
        let _ = writeln!(
            svg,
            r#"<rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="gray"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif">{}</text>"#,
            x0 + 4.0,
            y0 - 6.0,
            escape(&panel.label)
        );
        for set in panel.contours {
            let colour = match set.level {
                super::ContourLevel::TwoSigma => "black",
                super::ContourLevel::HalfSigma => "crimson",
            };
            for line in &set.polylines {
                let pts: Vec<String> = line
                    .points
                    .iter()
                    .map(|(q, p)| {
                        let sx = x0 + (q - d.q0) / span_q * PANEL;
                        let sy = y0 + PANEL - (p - d.p0) / span_p * PANEL;
                        format!("{sx:.2},{sy:.2}")
                    })
                    .collect();
                let tag = if line.closed { "polygon" } else { "polyline" };
                let _ = writeln!(
                    svg,
                    r#"<{tag} points="{}" fill="none" stroke="{colour}" stroke-width="1"/>"#,
                    pts.join(" ")
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
