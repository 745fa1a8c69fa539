use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::PhaseSpaceDensity;

/// Gaussian contour levels relative to the peak `1/πħ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContourLevel {
    /// Radius `2σ`, enclosing one Planck cell `h`.
    TwoSigma,
    /// Radius `σ/2`.
    HalfSigma,
}

impl ContourLevel {
    pub const BOTH: [ContourLevel; 2] = [ContourLevel::TwoSigma, ContourLevel::HalfSigma];

    /// Fraction of the peak value at this radius.
    pub fn relative_level(self) -> f64 {
        match self {
            ContourLevel::TwoSigma => (-2.0_f64).exp(),
            ContourLevel::HalfSigma => (-0.125_f64).exp(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ContourLevel::TwoSigma => "2sigma",
            ContourLevel::HalfSigma => "sigma/2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Contour {
    pub fn area(&self) -> f64 {
        polygon_area(&self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub level: ContourLevel,
    pub threshold: f64,
    /// Polylines, largest enclosed area first.
    pub polylines: Vec<Contour>,
}

impl ContourSet {
    /// More than one polyline, or an open one: the blob split or hit the window edge.
    pub fn is_fragmented(&self) -> bool {
        self.polylines.len() != 1 || !self.polylines[0].closed
    }

    pub fn main(&self) -> Option<&Contour> {
        self.polylines.first()
    }

    pub fn area(&self) -> f64 {
        self.main().map_or(0.0, Contour::area)
    }

    pub fn circularity(&self) -> f64 {
        self.main().map_or(f64::INFINITY, |c| circularity(&c.points))
    }
}

/// Shoelace area (absolute value).
pub fn polygon_area(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for (k, a) in points.iter().enumerate() {
        let b = points[(k + 1) % points.len()];
        twice += a.0 * b.1 - b.0 * a.1;
    }
    0.5 * twice.abs()
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len();
    let origin = points[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (x0, y0) = (points[k].0 - origin.0, points[k].1 - origin.1);
        let next = points[(k + 1) % n];
        let (x1, y1) = (next.0 - origin.0, next.1 - origin.1);
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    if a.abs() < f64::MIN_POSITIVE {
        let mean = points
            .iter()
            .fold((0.0, 0.0), |s, p| (s.0 + p.0 / n as f64, s.1 + p.1 / n as f64));
        return mean;
    }
    (origin.0 + cx / (3.0 * a), origin.1 + cy / (3.0 * a))
}

/// Ratio of largest to smallest vertex distance from the area centroid.
pub fn circularity(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return f64::INFINITY;
    }
    let (cx, cy) = polygon_centroid(points);
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| {
        let r = (p.0 - cx).hypot(p.1 - cy);
        (lo.min(r), hi.max(r))
    });
    hi / lo
}

/// Grid edge carrying a crossing: horizontal edges run along `q`
/// from `(i, j)` to `(i+1, j)`, vertical ones along `p` to `(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    Q(usize, usize),
    P(usize, usize),
}

/// Marching-squares contours of `density` at `fraction × 1/πħ`.
pub fn extract_contours(density: &PhaseSpaceDensity, level: ContourLevel) -> ContourSet {
    let threshold = level.relative_level() * density.peak_level();
    let polylines = trace_level(density, threshold);
    ContourSet {
        level,
        threshold,
        polylines,
    }
}

fn trace_level(d: &PhaseSpaceDensity, threshold: f64) -> Vec<Contour> {
    let (n_q, n_p) = (d.resolution.n_q, d.resolution.n_p);
    let v = |i: usize, j: usize| d.at(i, j) - threshold;
    let point = |edge: Edge| -> (f64, f64) {
        let (a, b, (i, j), along_q) = match edge {
            Edge::Q(i, j) => (v(i, j), v(i + 1, j), (i, j), true),
            Edge::P(i, j) => (v(i, j), v(i, j + 1), (i, j), false),
        };
        let t = a / (a - b);
        if along_q {
            (d.q(i) + t * d.dq, d.p(j))
        } else {
            (d.q(i), d.p(j) + t * d.dp)
        }
    };

    let mut links: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut add = |a: Edge, b: Edge| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for i in 0..n_q - 1 {
        for j in 0..n_p - 1 {
            let c = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            let code = c
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, x)| acc | (((*x > 0.0) as u8) << k));
            if code == 0 || code == 15 {
                continue;
            }
            // Cell edges in corner order: bottom, right, top, left.
            let bottom = Edge::Q(i, j);
            let right = Edge::P(i + 1, j);
            let top = Edge::Q(i, j + 1);
            let left = Edge::P(i, j);
            let centre_high = c.iter().sum::<f64>() > 0.0;
            match code {
                1 | 14 => add(left, bottom),
                2 | 13 => add(bottom, right),
                3 | 12 => add(left, right),
                4 | 11 => add(right, top),
                6 | 9 => add(bottom, top),
                7 | 8 => add(left, top),
                5 => {
                    if centre_high {
                        add(left, top);
                        add(bottom, right);
                    } else {
                        add(left, bottom);
                        add(right, top);
                    }
                }
                10 => {
                    if centre_high {
                        add(left, bottom);
                        add(right, top);
                    } else {
                        add(left, top);
                        add(bottom, right);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut keys: Vec<Edge> = links.keys().copied().collect();
    keys.sort_by_key(|e| match *e {
        Edge::Q(i, j) => (i, j, 0),
        Edge::P(i, j) => (i, j, 1),
    });
    let mut visited: HashMap<Edge, bool> = HashMap::new();
    let mut contours = Vec::new();
    // Open chains first start from their endpoints, then closed loops.
    let starts: Vec<Edge> = keys
        .iter()
        .copied()
        .filter(|e| links[e].len() == 1)
        .chain(keys.iter().copied())
        .collect();
    for start in starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut chain = vec![start];
        visited.insert(start, true);
        let mut current = start;
        let closed = loop {
            let next = links[&current].iter().copied().find(|e| !visited.contains_key(e));
            match next {
                Some(e) => {
                    visited.insert(e, true);
                    chain.push(e);
                    current = e;
                }
                None => break chain.len() > 2 && links[&current].contains(&start),
            }
        };
        contours.push(Contour {
            points: chain.into_iter().map(point).collect(),
            closed,
        });
    }
    contours.sort_by(|a, b| b.area().total_cmp(&a.area()));
    contours
}
