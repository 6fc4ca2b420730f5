//! Gauss-Legendre rules and the panel layout along the contour.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on `P_n` from Chebyshev-like starting guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Maps a rule on `[-1, 1]` to `[a, b]`.
pub fn mapped<'a>(
    nodes: &'a [f64],
    weights: &'a [f64],
    a: f64,
    b: f64,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    nodes
        .iter()
        .zip(weights)
        .map(move |(x, w)| (mid + half * x, half * w))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PanelKind {
    /// Variable `tau in (0, 1]` with `|t| = tau^(1/alpha)`.
    Graded,
    /// Variable `y = ln |t|` on `[0, ln t_max]`.
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel {
    pub kind: PanelKind,
    /// Endpoints in the panel variable.
    pub a: f64,
    pub b: f64,
    /// `+1` or `-1`: which half-line of the contour.
    pub sign: f64,
}

impl Panel {
    /// Endpoints in `|t|`.
    pub fn t_range(&self, alpha: f64) -> (f64, f64) {
        match self.kind {
            PanelKind::Graded => (self.a.powf(1.0 / alpha), self.b.powf(1.0 / alpha)),
            PanelKind::Log => (self.a.exp(), self.b.exp()),
        }
    }
}

/// Panels covering `[-t_max, t_max] \ {0}`: dyadic panels in `tau` on
/// `(0, 1/8]`, uniform panels of width `1/8` on `[1/8, 1]`, and log-spaced
/// panels on `[1, t_max]`. Ordered from `-t_max` to `t_max`.
pub fn layout(t_max: f64, panels_per_decade: usize, levels: usize) -> Vec<Panel> {
    let mut half = Vec::new();
    half.push((PanelKind::Graded, 0.0, 0.5f64.powi(levels as i32 + 3)));
    for k in (0..levels).rev() {
        half.push((
            PanelKind::Graded,
            0.5f64.powi(k as i32 + 4),
            0.5f64.powi(k as i32 + 3),
        ));
    }
    for k in 1..8 {
        half.push((PanelKind::Graded, k as f64 / 8.0, (k + 1) as f64 / 8.0));
    }
    let ymax = t_max.ln();
    let count = ((t_max.log10() * panels_per_decade as f64).ceil() as usize).max(1);
    for k in 0..count {
        half.push((
            PanelKind::Log,
            ymax * k as f64 / count as f64,
            ymax * (k + 1) as f64 / count as f64,
        ));
    }
    let neg = half.iter().rev().map(|&(kind, a, b)| Panel {
        kind,
        a,
        b,
        sign: -1.0,
    });
    let pos = half.iter().map(|&(kind, a, b)| Panel {
        kind,
        a,
        b,
        sign: 1.0,
    });
    neg.chain(pos).collect()
}
