//! Mamdani fuzzy complexity weights.
//!
//! Each component kind gets a two-input fuzzy system: DET and RET/FTR counts
//! are fuzzified with trapezoids whose shoulders straddle the matrix cut
//! points, the nine rules copy the crisp matrix grid, and the output is the
//! centroid of the min-clipped, max-aggregated triangles centered on the
//! kind's Low/Average/High weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{
    ComplexityLevel, ComplexityMatrix, ComponentInstance, ComponentKind, MatrixSet, WeightTable,
};

pub const DEFAULT_OVERLAP: f64 = 0.25;

/// Top-band core extends to this multiple of the upper cut.
pub const DEFAULT_DOMAIN_FACTOR: f64 = 2.0;

/// Trapezoid with support `[a, d]` and core `[b, c]`. A triangle has `b == c`;
/// a left shoulder has `a == b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipFunction {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MembershipFunction {
    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a <= b && b <= c && c <= d) || [a, b, c, d].iter().any(|v| v.is_nan()) {
            return Err(Error::Config(format!(
                "trapezoid needs a <= b <= c <= d, got ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn triangle(center: f64, half_width: f64) -> Result<Self> {
        Self::trapezoid(center - half_width, center, center, center + half_width)
    }

    pub fn degree(&self, x: f64) -> f64 {
        if x >= self.b && x <= self.c {
            1.0
        } else if x <= self.a || x >= self.d {
            0.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }
}

/// Three fuzzy sets (Low, Average, High band) over one input axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable {
    pub name: String,
    pub sets: [MembershipFunction; 3],
    /// Inputs above this are evaluated at this value.
    pub domain_max: f64,
}

impl FuzzyVariable {
    /// Places three trapezoids from integer band cuts. The boundary between
    /// bands sits half-way between the last value of one band and the first
    /// of the next; each shoulder is `overlap × min(adjacent band widths)`
    /// wide and centered on the boundary.
    pub fn from_cuts(name: &str, cuts: [u32; 2], domain_max: f64, overlap: f64) -> Result<Self> {
        if !(overlap > 0.0 && overlap < 1.0) {
            return Err(Error::Config(format!(
                "overlap must lie in (0, 1), got {overlap}"
            )));
        }
        let (c1, c2) = (f64::from(cuts[0]), f64::from(cuts[1]));
        let widths = [c1 - 1.0, c2 - c1, domain_max - c2];
        if let Some(i) = widths.iter().position(|w| !(*w > 0.0)) {
            return Err(Error::Config(format!(
                "{name}: band {} has zero width (cuts {cuts:?}, domain max {domain_max})",
                i + 1
            )));
        }
        let (b1, b2) = (c1 - 0.5, c2 - 0.5);
        let h1 = 0.5 * overlap * widths[0].min(widths[1]);
        let h2 = 0.5 * overlap * widths[1].min(widths[2]);
        let sets = [
            MembershipFunction::trapezoid(0.0, 0.0, b1 - h1, b1 + h1)?,
            MembershipFunction::trapezoid(b1 - h1, b1 + h1, b2 - h2, b2 + h2)?,
            MembershipFunction::trapezoid(b2 - h2, b2 + h2, domain_max, domain_max)?,
        ];
        Ok(Self {
            name: name.to_string(),
            sets,
            domain_max,
        })
    }

    pub fn degrees(&self, x: f64) -> [f64; 3] {
        let x = x.min(self.domain_max);
        self.sets.map(|s| s.degree(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub record_band: usize,
    pub det_band: usize,
    pub consequent: ComplexityLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyWeightSystem {
    pub kind: ComponentKind,
    pub det_var: FuzzyVariable,
    pub record_var: FuzzyVariable,
    /// Output triangles over the weight axis, one per complexity level.
    pub output_sets: [MembershipFunction; 3],
    pub rules: [FuzzyRule; 9],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyOptions {
    pub overlap: f64,
    pub domain_factor: f64,
}

impl Default for FuzzyOptions {
    fn default() -> Self {
        Self {
            overlap: DEFAULT_OVERLAP,
            domain_factor: DEFAULT_DOMAIN_FACTOR,
        }
    }
}

pub fn build_system(
    kind: ComponentKind,
    matrix: &ComplexityMatrix,
    weights: &WeightTable,
    overlap: f64,
) -> Result<FuzzyWeightSystem> {
    build_system_with(
        kind,
        matrix,
        weights,
        FuzzyOptions {
            overlap,
            ..FuzzyOptions::default()
        },
    )
}

pub fn build_system_with(
    kind: ComponentKind,
    matrix: &ComplexityMatrix,
    weights: &WeightTable,
    opts: FuzzyOptions,
) -> Result<FuzzyWeightSystem> {
    if !(opts.domain_factor > 1.0) {
        return Err(Error::Config(format!(
            "domain factor must exceed 1, got {}",
            opts.domain_factor
        )));
    }
    let det_cuts = matrix.det_cuts();
    let record_cuts = matrix.record_cuts();
    let det_var = FuzzyVariable::from_cuts(
        "det",
        det_cuts,
        opts.domain_factor * f64::from(det_cuts[1]),
        opts.overlap,
    )?;
    let record_var = FuzzyVariable::from_cuts(
        if kind.is_data_function() {
            "ret"
        } else {
            "ftr"
        },
        record_cuts,
        opts.domain_factor * f64::from(record_cuts[1]),
        opts.overlap,
    )?;

    let centers = weights.row(kind);
    let mut half_width = 0.5 * (centers[2] - centers[0]);
    if half_width <= 0.0 {
        // All three weights coincide; any width gives the same centroid.
        half_width = 1.0;
    }
    let output_sets = [
        MembershipFunction::triangle(centers[0], half_width)?,
        MembershipFunction::triangle(centers[1], half_width)?,
        MembershipFunction::triangle(centers[2], half_width)?,
    ];

    let rules = std::array::from_fn(|i| FuzzyRule {
        record_band: i / 3,
        det_band: i % 3,
        consequent: matrix.level(i / 3, i % 3),
    });

    Ok(FuzzyWeightSystem {
        kind,
        det_var,
        record_var,
        output_sets,
        rules,
    })
}

impl FuzzyWeightSystem {
    pub fn centers(&self) -> [f64; 3] {
        self.output_sets.map(|s| s.b)
    }

    /// Firing strength per consequent level: min over the two antecedents,
    /// max over rules sharing a consequent.
    pub fn strengths(&self, det: f64, records: f64) -> [f64; 3] {
        let mu_det = self.det_var.degrees(det);
        let mu_rec = self.record_var.degrees(records);
        let mut alpha = [0.0f64; 3];
        for rule in &self.rules {
            let s = mu_rec[rule.record_band].min(mu_det[rule.det_band]);
            let slot = &mut alpha[rule.consequent.index()];
            *slot = slot.max(s);
        }
        alpha
    }

    /// Mamdani inference with centroid defuzzification.
    pub fn infer_weight(&self, det: f64, records: f64) -> Result<f64> {
        if !(det >= 1.0 && records >= 1.0) || !det.is_finite() || !records.is_finite() {
            return Err(Error::InvalidComponent {
                kind: self.kind,
                det,
                records,
            });
        }
        let alpha = self.strengths(det, records);
        if alpha.iter().all(|a| *a <= 0.0) {
            return Err(Error::Coverage {
                kind: self.kind,
                det,
                records,
            });
        }
        Ok(centroid(&self.output_sets, &alpha))
    }

    pub fn infer_component(&self, c: &ComponentInstance) -> Result<f64> {
        self.infer_weight(f64::from(c.det), f64::from(c.records))
    }
}

/// Vertices of a triangle clipped at height `alpha`.
fn clipped_vertices(set: &MembershipFunction, alpha: f64) -> [(f64, f64); 4] {
    let (lo, mid, hi) = (set.a, set.b, set.d);
    [
        (lo, 0.0),
        (lo + alpha * (mid - lo), alpha),
        (hi - alpha * (hi - mid), alpha),
        (hi, 0.0),
    ]
}

fn aggregate_at(sets: &[MembershipFunction; 3], alpha: &[f64; 3], y: f64) -> f64 {
    sets.iter()
        .zip(alpha)
        .map(|(s, a)| s.degree(y).min(*a))
        .fold(0.0, f64::max)
}

/// Exact centroid of `max_k min(alpha_k, set_k(y))` over triangular sets.
///
/// The aggregate is piecewise linear; between consecutive breakpoints
/// (clipped-set vertices and pairwise segment crossings) it is linear, so
/// area and first moment integrate exactly.
fn centroid(sets: &[MembershipFunction; 3], alpha: &[f64; 3]) -> f64 {
    let active: Vec<[(f64, f64); 4]> = sets
        .iter()
        .zip(alpha)
        .filter(|(_, a)| **a > 0.0)
        .map(|(s, a)| clipped_vertices(s, *a))
        .collect();

    let mut xs: Vec<f64> = active.iter().flat_map(|v| v.iter().map(|p| p.0)).collect();
    for (i, vi) in active.iter().enumerate() {
        for vj in &active[i + 1..] {
            for si in vi.windows(2) {
                for sj in vj.windows(2) {
                    if let Some(x) = crossing(si[0], si[1], sj[0], sj[1]) {
                        xs.push(x);
                    }
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let (mut area, mut moment) = (0.0, 0.0);
    for w in xs.windows(2) {
        let (x1, x2) = (w[0], w[1]);
        let dx = x2 - x1;
        if dx <= 0.0 {
            continue;
        }
        let y1 = aggregate_at(sets, alpha, x1);
        let y2 = aggregate_at(sets, alpha, x2);
        area += 0.5 * (y1 + y2) * dx;
        moment += dx * (x1 * (2.0 * y1 + y2) + x2 * (y1 + 2.0 * y2)) / 6.0;
    }
    moment / area
}

/// Abscissa where two segments cross strictly inside their common x-range.
fn crossing(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> Option<f64> {
    let lo = p1.0.max(q1.0);
    let hi = p2.0.min(q2.0);
    if !(hi > lo) || p2.0 <= p1.0 || q2.0 <= q1.0 {
        return None;
    }
    let at = |a: (f64, f64), b: (f64, f64), x: f64| a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
    let g_lo = at(p1, p2, lo) - at(q1, q2, lo);
    let g_hi = at(p1, p2, hi) - at(q1, q2, hi);
    if g_lo * g_hi < 0.0 {
        Some(lo + (hi - lo) * g_lo / (g_lo - g_hi))
    } else {
        None
    }
}

/// One fuzzy system per component kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySystemSet {
    systems: [FuzzyWeightSystem; 5],
}

impl FuzzySystemSet {
    pub fn build(matrices: &MatrixSet, weights: &WeightTable, opts: FuzzyOptions) -> Result<Self> {
        let systems: Vec<_> = ComponentKind::ALL
            .iter()
            .map(|&k| build_system_with(k, matrices.get(k), weights, opts))
            .collect::<Result<_>>()?;
        Ok(Self {
            systems: systems.try_into().expect("one system per kind"),
        })
    }

    pub fn get(&self, kind: ComponentKind) -> &FuzzyWeightSystem {
        &self.systems[kind.index()]
    }
}

/// Sum of fuzzy weights over a component inventory.
pub fn fuzzy_ufp(components: &[ComponentInstance], systems: &FuzzySystemSet) -> Result<f64> {
    components
        .iter()
        .map(|c| systems.get(c.kind).infer_component(c))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub det: f64,
    pub records: f64,
    pub weight: f64,
}

/// Evaluates the system on a rectangular grid, det-major.
pub fn sweep(
    system: &FuzzyWeightSystem,
    det: (f64, f64),
    records: (f64, f64),
    step: f64,
) -> Result<Vec<SurfacePoint>> {
    if !(step > 0.0) {
        return Err(Error::Config(format!(
            "sweep step must be positive, got {step}"
        )));
    }
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor().max(0.0) as usize;
        (0..=n).map(|i| lo + step * i as f64).collect()
    };
    let rec_axis = axis(records);
    let mut out = Vec::new();
    for d in axis(det) {
        for &r in &rec_axis {
            out.push(SurfacePoint {
                det: d,
                records: r,
                weight: system.infer_weight(d, r)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::{classify, ComponentKind::*};

    fn ilf_system(overlap: f64) -> FuzzyWeightSystem {
        build_system(
            InternalLogicalFile,
            &ComplexityMatrix::default_for(InternalLogicalFile),
            &WeightTable::ORIGINAL,
            overlap,
        )
        .unwrap()
    }

    /// Midpoint-rule centroid over the aggregate, built from the public sets
    /// and rules only.
    fn sampled_centroid(sys: &FuzzyWeightSystem, det: f64, rec: f64, n: usize) -> f64 {
        let mu_d = sys.det_var.degrees(det);
        let mu_r = sys.record_var.degrees(rec);
        let lo = sys.output_sets[0].a;
        let hi = sys.output_sets[2].d;
        let dy = (hi - lo) / n as f64;
        let (mut area, mut moment) = (0.0, 0.0);
        for i in 0..n {
            let y = lo + (i as f64 + 0.5) * dy;
            let mut m = 0.0f64;
            for rule in &sys.rules {
                let s = mu_d[rule.det_band].min(mu_r[rule.record_band]);
                m = m.max(s.min(sys.output_sets[rule.consequent.index()].degree(y)));
            }
            area += m * dy;
            moment += m * y * dy;
        }
        moment / area
    }

    #[test]
    fn trapezoid_degrees() {
        let mf = MembershipFunction::trapezoid(1.0, 3.0, 5.0, 9.0).unwrap();
        assert_eq!(mf.degree(4.0), 1.0);
        assert_eq!(mf.degree(3.0), 1.0);
        assert_eq!(mf.degree(0.5), 0.0);
        assert_eq!(mf.degree(10.0), 0.0);
        assert_eq!(mf.degree(2.0), 0.5);
        assert_eq!(mf.degree(7.0), 0.5);
        assert!(MembershipFunction::trapezoid(2.0, 1.0, 3.0, 4.0).is_err());
    }

    #[test]
    fn rules_copy_the_matrix_grid() {
        let sys = ilf_system(0.25);
        let rule = sys
            .rules
            .iter()
            .find(|r| r.record_band == 0 && r.det_band == 1)
            .unwrap();
        assert_eq!(rule.consequent, ComplexityLevel::Low);
        let m = ComplexityMatrix::default_for(InternalLogicalFile);
        for r in &sys.rules {
            assert_eq!(r.consequent, m.level(r.record_band, r.det_band));
        }
        assert_eq!(sys.centers(), [7.0, 10.0, 15.0]);
    }

    #[test]
    fn input_variables_cover_the_domain_with_at_most_two_sets() {
        for kind in ComponentKind::ALL {
            let sys = build_system(
                kind,
                &ComplexityMatrix::default_for(kind),
                &WeightTable::ORIGINAL,
                0.9,
            )
            .unwrap();
            for var in [&sys.det_var, &sys.record_var] {
                let mut x = 0.0;
                while x < var.domain_max * 1.5 {
                    let mu = var.degrees(x);
                    let nonzero = mu.iter().filter(|m| **m > 0.0).count();
                    assert!((1..=2).contains(&nonzero), "{} at {x}: {mu:?}", var.name);
                    x += 0.01;
                }
            }
        }
    }

    #[test]
    fn degenerate_bands_and_overlap_are_config_errors() {
        assert!(FuzzyVariable::from_cuts("det", [20, 51], 51.0, 0.25).is_err());
        assert!(FuzzyVariable::from_cuts("det", [20, 51], 102.0, 0.0).is_err());
        assert!(FuzzyVariable::from_cuts("det", [20, 51], 102.0, 1.0).is_err());
    }

    #[test]
    fn interior_average_cell_gives_average_weight() {
        let w = ilf_system(0.25).infer_weight(35.0, 3.0).unwrap();
        assert!((w - 10.0).abs() < 0.5);
        assert!((w - sampled_centroid(&ilf_system(0.25), 35.0, 3.0, 10_000)).abs() < 1e-3);
    }

    #[test]
    fn boundary_jump_is_smoothed() {
        let sys = ilf_system(DEFAULT_OVERLAP);
        let w19 = sys.infer_weight(19.0, 3.0).unwrap();
        let w20 = sys.infer_weight(20.0, 3.0).unwrap();
        let w50 = sys.infer_weight(50.0, 3.0).unwrap();
        assert!((w20 - w19).abs() < 3.0);
        assert!(w20 > w19);
        assert!(w50 > w20);
        for (det, w) in [(19.0, w19), (20.0, w20), (50.0, w50)] {
            assert!((w - sampled_centroid(&sys, det, 3.0, 10_000)).abs() < 1e-3);
        }
    }

    #[test]
    fn vanishing_overlap_recovers_crisp_weights() {
        let sys = ilf_system(1e-6);
        let m = ComplexityMatrix::default_for(InternalLogicalFile);
        for det in 1..=120u32 {
            for rec in 1..=15u32 {
                let level =
                    classify(&ComponentInstance::new(InternalLogicalFile, det, rec), &m).unwrap();
                let crisp = WeightTable::ORIGINAL.get(InternalLogicalFile, level);
                let fuzzy = sys.infer_weight(f64::from(det), f64::from(rec)).unwrap();
                assert!(
                    (fuzzy - crisp).abs() < 1e-9,
                    "det={det} rec={rec}: {fuzzy} vs {crisp}"
                );
            }
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        let sys = ilf_system(0.25);
        assert!(sys.infer_weight(0.5, 3.0).is_err());
        assert!(sys.infer_weight(5.0, 0.0).is_err());
        assert!(sys.infer_weight(f64::NAN, 3.0).is_err());
    }

    #[test]
    fn above_domain_max_is_constant() {
        let sys = ilf_system(0.25);
        let a = sys.infer_weight(500.0, 40.0).unwrap();
        let b = sys.infer_weight(5000.0, 400.0).unwrap();
        assert_eq!(a, b);
        assert!((a - 15.0).abs() < 1e-12);
    }

    #[test]
    fn fuzzy_ufp_examples() {
        let systems = FuzzySystemSet::build(
            &MatrixSet::default(),
            &WeightTable::ORIGINAL,
            FuzzyOptions::default(),
        )
        .unwrap();
        assert_eq!(fuzzy_ufp(&[], &systems).unwrap(), 0.0);

        let table1: Vec<_> = [50, 20, 19]
            .iter()
            .map(|&d| ComponentInstance::new(InternalLogicalFile, d, 3))
            .collect();
        let total = fuzzy_ufp(&table1, &systems).unwrap();
        let mut sum = 0.0;
        for c in &table1 {
            let w = systems.get(c.kind).infer_component(c).unwrap();
            assert!((7.0..=15.0).contains(&w));
            sum += w;
        }
        assert!((total - sum).abs() < 1e-12);

        let one = [ComponentInstance::new(ExternalInput, 10, 2)];
        assert_eq!(
            fuzzy_ufp(&one, &systems).unwrap(),
            systems.get(ExternalInput).infer_weight(10.0, 2.0).unwrap()
        );
    }

    #[test]
    fn equal_weights_collapse_to_that_weight() {
        let mut w = *WeightTable::ORIGINAL.as_array();
        w[3] = [8.0, 8.0, 8.0];
        let weights = WeightTable::new(w).unwrap();
        let sys = build_system(
            InternalLogicalFile,
            &ComplexityMatrix::default_for(InternalLogicalFile),
            &weights,
            0.25,
        )
        .unwrap();
        for det in [1.0, 19.0, 20.0, 60.0] {
            assert!((sys.infer_weight(det, 3.0).unwrap() - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_shape() {
        let sys = ilf_system(0.25);
        let pts = sweep(&sys, (1.0, 10.0), (1.0, 3.0), 1.0).unwrap();
        assert_eq!(pts.len(), 30);
        assert_eq!((pts[0].det, pts[0].records), (1.0, 1.0));
        assert_eq!((pts[29].det, pts[29].records), (10.0, 3.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn kind() -> impl Strategy<Value = ComponentKind> {
            (0usize..5).prop_map(|i| ComponentKind::ALL[i])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn centroid_matches_sampling_and_stays_in_range(
                k in kind(),
                det in 1.0f64..150.0,
                rec in 1.0f64..15.0,
                overlap in 0.05f64..0.95,
            ) {
                let sys = build_system(k, &ComplexityMatrix::default_for(k), &WeightTable::ORIGINAL, overlap).unwrap();
                let w = sys.infer_weight(det, rec).unwrap();
                let c = sys.centers();
                prop_assert!(w >= c[0] - 1e-12 && w <= c[2] + 1e-12);
                prop_assert!((w - sampled_centroid(&sys, det, rec, 10_000)).abs() < 1e-3);
            }

            #[test]
            fn monotone_in_each_input(
                k in kind(),
                det in 1u32..150,
                rec in 1u32..15,
                step in 1u32..5,
            ) {
                // Integer counts only: where both inputs sit inside shoulders the
                // max-aggregated surface can dip between grid points.
                let sys = build_system(k, &ComplexityMatrix::default_for(k), &WeightTable::ORIGINAL, 0.25).unwrap();
                let (d, r, s) = (f64::from(det), f64::from(rec), f64::from(step));
                let w = sys.infer_weight(d, r).unwrap();
                prop_assert!(sys.infer_weight(d + s, r).unwrap() >= w - 1e-12);
                prop_assert!(sys.infer_weight(d, r + s).unwrap() >= w - 1e-12);
            }
        }
    }
}
