//! Published resonance table for `q = −1` and the comparison against it.

/// `(p, ω₁, M(Q_{ω₁}))`, from the computed table of even threshold
/// resonances and masses for `q = −1`.
pub const PUBLISHED: [(f64, f64, f64); 11] = [
    (4.2, 2.278, 1.286),
    (4.4, 1.996, 1.218),
    (4.6, 1.785, 1.165),
    (4.8, 1.621, 1.123),
    (5.0, 1.482, 1.089),
    (5.2, 1.387, 1.061),
    (5.4, 1.301, 1.038),
    (5.6, 1.229, 1.019),
    (5.8, 1.168, 1.003),
    (6.0, 1.116, 0.989),
    (6.2, 1.072, 0.976),
];

/// Relative tolerance against the published values.
pub const REL_TOL: f64 = 0.02;

/// Absolute tolerance between the shooter and the Jost threshold root.
pub const CROSS_TOL: f64 = 1e-2;

/// One computed row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Computed {
    pub p: f64,
    pub omega1: f64,
    pub mass: f64,
    pub omega2: f64,
    pub omega_crit: f64,
    pub det_root: f64,
}

/// Comparison of one row with its published counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowDiff {
    pub p: f64,
    pub omega1_rel: f64,
    pub mass_rel: f64,
    pub cross: f64,
}

impl RowDiff {
    pub fn passed(&self) -> bool {
        self.omega1_rel <= REL_TOL && self.mass_rel <= REL_TOL && self.cross < CROSS_TOL
    }
}

pub fn published(p: f64) -> Option<(f64, f64)> {
    PUBLISHED.iter().find(|r| (r.0 - p).abs() < 1e-9).map(|r| (r.1, r.2))
}

/// Relative deviations; missing values count as failures.
pub fn compare(row: &Computed) -> Option<RowDiff> {
    let (w, m) = published(row.p)?;
    let rel = |a: f64, b: f64| if a.is_finite() { (a - b).abs() / b } else { f64::INFINITY };
    let cross = if row.omega1.is_finite() && row.det_root.is_finite() {
        (row.omega1 - row.det_root).abs()
    } else {
        f64::INFINITY
    };
    Some(RowDiff { p: row.p, omega1_rel: rel(row.omega1, w), mass_rel: rel(row.mass, m), cross })
}
