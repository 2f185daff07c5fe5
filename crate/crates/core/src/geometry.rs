//! Problem domains, scattered node generation, evaluation grids, and the
//! fill and separation measures of node quality.
//!
//! A [`Domain`] couples a membership predicate (the closed inequalities
//! defining the region) with a quadrature decomposition: an interval in
//! one dimension, type-I pieces (inner-axis bounds as functions of the
//! outer coordinate) in two, and axis-aligned boxes, possibly stated in
//! sheared coordinates, in three. Singular integration dispatches to the
//! graded split rules of the quadrature module piece by piece, preserving
//! their exact-radial-offset guarantee.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{self, GradedQuadSpec};

/// Membership predicate over points.
pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
/// Inner-axis bound as a function of the outer coordinate.
pub type Bound = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One type-I slice of a planar region: for `outer` in `outer_range` the
/// inner coordinate runs over `[lower(outer), upper(outer)]`.
#[derive(Clone)]
pub struct TypeIPiece {
    /// Index (0 or 1) of the outer coordinate.
    pub outer_axis: usize,
    /// Outer-coordinate range.
    pub outer_range: (f64, f64),
    /// Lower inner bound.
    pub lower: Bound,
    /// Upper inner bound.
    pub upper: Bound,
}

/// Shear substitution `p[target] += coeff * p[source]` mapping a slanted
/// slab onto an axis-aligned box; unit Jacobian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shear {
    /// Axis rewritten by the substitution.
    pub target: usize,
    /// Axis whose value is mixed in.
    pub source: usize,
    /// Mixing coefficient.
    pub coeff: f64,
}

/// An axis-aligned box `lo..hi`, stated in sheared coordinates when
/// `shear` is present.
#[derive(Clone, Debug)]
pub struct BoxPiece {
    /// Lower corner (sheared coordinates).
    pub lo: Vec<f64>,
    /// Upper corner (sheared coordinates).
    pub hi: Vec<f64>,
    /// Optional shear mapping the slab onto this box.
    pub shear: Option<Shear>,
}

#[derive(Clone)]
pub(crate) enum Pieces {
    Interval { a: f64, b: f64 },
    TypeI(Vec<TypeIPiece>),
    Boxes(Vec<BoxPiece>),
}

/// A closed bounded region with its quadrature decomposition.
#[derive(Clone)]
pub struct Domain {
    key: String,
    dimension: usize,
    pieces: Pieces,
    membership: Predicate,
    bbox: (Vec<f64>, Vec<f64>),
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("key", &self.key)
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

impl Domain {
    /// The interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Domain> {
        if !a.is_finite() || !b.is_finite() || !(b > a) {
            return Err(Error::Config(format!("invalid interval [{a}, {b}]")));
        }
        let key =
            if a == 0.0 && b == 1.0 { "interval01".to_string() } else { format!("box:{a},{b}") };
        Ok(Domain {
            key,
            dimension: 1,
            pieces: Pieces::Interval { a, b },
            membership: Arc::new(move |p: &[f64]| p[0] >= a && p[0] <= b),
            bbox: (vec![a], vec![b]),
        })
    }

    /// Blade-shaped region: `|p0 - 1/2| <= (1/4) sqrt(3 p1 (3 p1 - 3)^2)`
    /// for `p1` in `[0, 1]`; a single type-I piece with outer axis 1.
    pub fn blade() -> Domain {
        let hw = |s: f64| 0.25 * (3.0 * s * (3.0 * s - 3.0).powi(2)).sqrt();
        Domain {
            key: "example3-blade".to_string(),
            dimension: 2,
            pieces: Pieces::TypeI(vec![TypeIPiece {
                outer_axis: 1,
                outer_range: (0.0, 1.0),
                lower: Arc::new(move |s| 0.5 - hw(s)),
                upper: Arc::new(move |s| 0.5 + hw(s)),
            }]),
            membership: Arc::new(move |p: &[f64]| {
                p[1] >= 0.0 && p[1] <= 1.0 && (p[0] - 0.5).abs() <= hw(p[1])
            }),
            bbox: (vec![0.0, 0.0], vec![1.0, 1.0]),
        }
    }

    /// Crescent between the half-circle `p0 = sqrt(1/4 - (p1 - 1/2)^2)`
    /// and the half-ellipse `p0 = sqrt(1 - 4 (p1 - 1/2)^2)` for `p1` in
    /// `[0, 1]`.
    pub fn crescent() -> Domain {
        let lo_b = |t: f64| (0.25 - (t - 0.5) * (t - 0.5)).max(0.0).sqrt();
        let hi_b = |t: f64| (1.0 - 4.0 * (t - 0.5) * (t - 0.5)).max(0.0).sqrt();
        Domain {
            key: "example4-crescent".to_string(),
            dimension: 2,
            pieces: Pieces::TypeI(vec![TypeIPiece {
                outer_axis: 1,
                outer_range: (0.0, 1.0),
                lower: Arc::new(lo_b),
                upper: Arc::new(hi_b),
            }]),
            membership: Arc::new(move |p: &[f64]| {
                p[1] >= 0.0 && p[1] <= 1.0 && p[0] >= lo_b(p[1]) && p[0] <= hi_b(p[1])
            }),
            bbox: (vec![0.0, 0.0], vec![1.0, 1.0]),
        }
    }

    /// Annulus `0.04 <= (p0 - 1/2)^2 + (p1 - 1/2)^2 <= 0.25`, decomposed
    /// into two caps and two bands around the inner disk.
    pub fn annulus() -> Domain {
        let outer = |v: f64| (0.25 - (v - 0.5) * (v - 0.5)).max(0.0).sqrt();
        let inner = |v: f64| (0.04 - (v - 0.5) * (v - 0.5)).max(0.0).sqrt();
        let cap = |range: (f64, f64)| TypeIPiece {
            outer_axis: 1,
            outer_range: range,
            lower: Arc::new(move |v| 0.5 - outer(v)),
            upper: Arc::new(move |v| 0.5 + outer(v)),
        };
        let pieces = vec![
            cap((0.0, 0.3)),
            TypeIPiece {
                outer_axis: 1,
                outer_range: (0.3, 0.7),
                lower: Arc::new(move |v| 0.5 + inner(v)),
                upper: Arc::new(move |v| 0.5 + outer(v)),
            },
            TypeIPiece {
                outer_axis: 1,
                outer_range: (0.3, 0.7),
                lower: Arc::new(move |v| 0.5 - outer(v)),
                upper: Arc::new(move |v| 0.5 - inner(v)),
            },
            cap((0.7, 1.0)),
        ];
        Domain {
            key: "example5-annulus".to_string(),
            dimension: 2,
            pieces: Pieces::TypeI(pieces),
            membership: Arc::new(|p: &[f64]| {
                let d2 = (p[0] - 0.5) * (p[0] - 0.5) + (p[1] - 0.5) * (p[1] - 0.5);
                (0.04..=0.25).contains(&d2)
            }),
            bbox: (vec![0.0, 0.0], vec![1.0, 1.0]),
        }
    }

    /// Union of four slabs in `(p0, p1, p2)`: two axis-aligned end blocks
    /// and two slanted bridges whose `p1`-extent shifts linearly with
    /// `p2`, stated as boxes in sheared coordinates.
    pub fn boxes3d() -> Domain {
        let pieces = vec![
            BoxPiece { lo: vec![0.0, 0.0, 0.0], hi: vec![0.3, 0.9, 0.3], shear: None },
            BoxPiece {
                lo: vec![0.0, 0.9, 0.3],
                hi: vec![0.3, 1.2, 0.6],
                shear: Some(Shear { target: 1, source: 2, coeff: 1.0 }),
            },
            BoxPiece {
                lo: vec![0.0, -0.3, 0.6],
                hi: vec![0.3, 0.0, 0.9],
                shear: Some(Shear { target: 1, source: 2, coeff: -1.0 }),
            },
            BoxPiece { lo: vec![0.0, 0.0, 0.9], hi: vec![0.3, 0.9, 1.2], shear: None },
        ];
        Domain {
            key: "example6-boxes3d".to_string(),
            dimension: 3,
            pieces: Pieces::Boxes(pieces),
            membership: Arc::new(|p: &[f64]| {
                let (s, r) = (p[1], p[2]);
                if !(0.0..=0.3).contains(&p[0]) || !(0.0..=1.2).contains(&r) {
                    return false;
                }
                if r <= 0.3 || r >= 0.9 {
                    (0.0..=0.9).contains(&s)
                } else if r <= 0.6 {
                    s >= 0.9 - r && s <= 1.2 - r
                } else {
                    s >= r - 0.3 && s <= r
                }
            }),
            bbox: (vec![0.0, 0.0, 0.0], vec![0.3, 0.9, 1.2]),
        }
    }

    /// Builds a registry domain: `interval01`, `example3-blade`,
    /// `example4-crescent`, `example5-annulus`, `example6-boxes3d`, or
    /// `box:<a>,<b>;...` for an axis-aligned product of one to three axes.
    pub fn from_key(key: &str) -> Result<Domain> {
        match key {
            "interval01" => Domain::interval(0.0, 1.0),
            "example3-blade" => Ok(Domain::blade()),
            "example4-crescent" => Ok(Domain::crescent()),
            "example5-annulus" => Ok(Domain::annulus()),
            "example6-boxes3d" => Ok(Domain::boxes3d()),
            other => match other.strip_prefix("box:") {
                Some(axes) => Domain::product_box(key, axes),
                None => Err(Error::Config(format!("unknown domain key {key:?}"))),
            },
        }
    }

    fn product_box(key: &str, axes: &str) -> Result<Domain> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in axes.split(';') {
            let (a, b) = part
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("box axis {part:?} is not <a>,<b>")))?;
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad box bound {a:?}")))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad box bound {b:?}")))?;
            if !a.is_finite() || !b.is_finite() || !(b > a) {
                return Err(Error::Config(format!("invalid box axis [{a}, {b}]")));
            }
            lo.push(a);
            hi.push(b);
        }
        match lo.len() {
            1 => {
                let mut domain = Domain::interval(lo[0], hi[0])?;
                domain.key = key.to_string();
                Ok(domain)
            }
            2 => {
                let (a0, b0, a1, b1) = (lo[0], hi[0], lo[1], hi[1]);
                Ok(Domain {
                    key: key.to_string(),
                    dimension: 2,
                    pieces: Pieces::TypeI(vec![TypeIPiece {
                        outer_axis: 1,
                        outer_range: (a1, b1),
                        lower: Arc::new(move |_| a0),
                        upper: Arc::new(move |_| b0),
                    }]),
                    membership: Arc::new(move |p: &[f64]| {
                        p[0] >= a0 && p[0] <= b0 && p[1] >= a1 && p[1] <= b1
                    }),
                    bbox: (vec![a0, a1], vec![b0, b1]),
                })
            }
            3 => {
                let (l, h) = (lo.clone(), hi.clone());
                Ok(Domain {
                    key: key.to_string(),
                    dimension: 3,
                    pieces: Pieces::Boxes(vec![BoxPiece {
                        lo: lo.clone(),
                        hi: hi.clone(),
                        shear: None,
                    }]),
                    membership: Arc::new(move |p: &[f64]| {
                        (0..3).all(|k| p[k] >= l[k] && p[k] <= h[k])
                    }),
                    bbox: (lo, hi),
                })
            }
            d => Err(Error::Config(format!("box domains take one to three axes, got {d}"))),
        }
    }

    /// Registry key or synthesized description.
    pub fn key(&self) -> &str {
        &self.key
    }

    /// Spatial dimension.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox.0, &self.bbox.1)
    }

    /// Closed-region membership test.
    pub fn contains(&self, p: &[f64]) -> bool {
        debug_assert_eq!(p.len(), self.dimension);
        (self.membership)(p)
    }

    /// Integrates `f(point, r)` over the domain with the graded split
    /// rules, singularity at `x0`; `r` is the exactly-computed distance
    /// from the node to `x0` and must be used for any singular factor.
    pub fn integrate_singular(
        &self,
        f: impl Fn(&[f64], f64) -> f64,
        x0: &[f64],
        spec: &GradedQuadSpec,
    ) -> Result<f64> {
        let mut acc = 0.0;
        let mut bad = None;
        self.for_each_singular_node(x0, spec, |p, w, r| {
            if bad.is_some() {
                return;
            }
            let v = f(p, r);
            if v.is_finite() {
                acc += w * v;
            } else {
                bad = Some(p.to_vec());
            }
        });
        match bad {
            Some(node) => Err(Error::NonFiniteIntegrand { node }),
            None => Ok(acc),
        }
    }

    /// Visits every quadrature node of the singular rule centered at `x0`
    /// as `(point, weight, r)`; assembly shares one sweep per collocation
    /// row across all basis functions.
    pub fn for_each_singular_node(
        &self,
        x0: &[f64],
        spec: &GradedQuadSpec,
        mut f: impl FnMut(&[f64], f64, f64),
    ) {
        debug_assert_eq!(x0.len(), self.dimension);
        match &self.pieces {
            Pieces::Interval { a, b } => {
                let (a, len) = (*a, *b - *a);
                let tau0 = (x0[0] - a) / len;
                quadrature::for_each_interval_node(tau0, spec, |tau, w, r| {
                    f(&[a + len * tau], len * w, len * r);
                });
            }
            Pieces::TypeI(pieces) => {
                let mut p = [0.0; 2];
                for piece in pieces {
                    let o = piece.outer_axis;
                    let i = 1 - o;
                    quadrature::for_each_2d_node(
                        piece.outer_range,
                        |v| (piece.lower)(v),
                        |v| (piece.upper)(v),
                        (x0[o], x0[i]),
                        spec,
                        quadrature::Rule2d::Refined,
                        |outer, inner, w, r| {
                            p[o] = outer;
                            p[i] = inner;
                            f(&p, w, r);
                        },
                    );
                }
            }
            Pieces::Boxes(pieces) => {
                for piece in pieces {
                    for_each_box_node(piece, x0, spec, &mut f);
                }
            }
        }
    }

    /// Uniform grid over the bounding box filtered by closed membership;
    /// one-dimensional domains return exactly `resolution` equispaced
    /// points.
    pub fn evaluation_grid(&self, resolution: usize) -> Result<Vec<Vec<f64>>> {
        if resolution < 2 {
            return Err(Error::Config("evaluation grid needs resolution >= 2".to_string()));
        }
        let d = self.dimension;
        let axes: Vec<Vec<f64>> =
            (0..d).map(|k| linspace(self.bbox.0[k], self.bbox.1[k], resolution)).collect();
        if d == 1 {
            return Ok(axes[0].iter().map(|&x| vec![x]).collect());
        }
        let mut out = Vec::new();
        let mut index = vec![0usize; d];
        let mut p = vec![0.0; d];
        'outer: loop {
            for k in 0..d {
                p[k] = axes[k][index[k]];
            }
            if (self.membership)(&p) {
                out.push(p.clone());
            }
            for k in (0..d).rev() {
                index[k] += 1;
                if index[k] < resolution {
                    continue 'outer;
                }
                index[k] = 0;
            }
            break;
        }
        Ok(out)
    }
}

/// Sweeps one box piece, unshearing points back to original coordinates
/// and correcting the radial offsets so `r` stays the exact original-space
/// distance.
fn for_each_box_node(
    piece: &BoxPiece,
    x0: &[f64],
    spec: &GradedQuadSpec,
    f: &mut impl FnMut(&[f64], f64, f64),
) {
    let Some(sh) = piece.shear else {
        quadrature::for_each_tensor_node(&piece.lo, &piece.hi, x0, spec, |p, w, r| f(p, w, r));
        return;
    };
    let d = piece.lo.len();
    let mut x0s = x0.to_vec();
    x0s[sh.target] += sh.coeff * x0[sh.source];
    let axes: Vec<Vec<(f64, f64, f64)>> = (0..d)
        .map(|k| quadrature::axis_split_nodes(piece.lo[k], piece.hi[k], x0s[k], spec))
        .collect();
    if axes.iter().any(|nodes| nodes.is_empty()) {
        return;
    }
    let mut point = vec![0.0; d];
    let mut offs = vec![0.0; d];
    let mut index = vec![0usize; d];
    'outer: loop {
        let mut w = 1.0;
        for k in 0..d {
            let (t, wk, off) = axes[k][index[k]];
            point[k] = t;
            offs[k] = off;
            w *= wk;
        }
        point[sh.target] -= sh.coeff * point[sh.source];
        // The sheared-axis offset unshears the same way; the source-axis
        // term keeps r strictly positive even if it cancels.
        let off_t = offs[sh.target] - sh.coeff * offs[sh.source];
        let mut r2 = off_t * off_t;
        for (k, off) in offs.iter().enumerate() {
            if k != sh.target {
                r2 += off * off;
            }
        }
        f(&point, w, r2.sqrt());
        for k in (0..d).rev() {
            index[k] += 1;
            if index[k] < axes[k].len() {
                continue 'outer;
            }
            index[k] = 0;
        }
        break;
    }
}

/// Scattered-node placement strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStrategy {
    /// Equispaced including both endpoints; one-dimensional domains only.
    Equispaced,
    /// Halton low-discrepancy points over the bounding box filtered by
    /// membership; the seed offsets the starting index.
    Halton,
    /// Uniform grid over the bounding box, refined until at least `n`
    /// points fall inside; the first `n` in row-major order are kept.
    GridFiltered,
}

impl std::str::FromStr for NodeStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<NodeStrategy> {
        match s.to_ascii_lowercase().as_str() {
            "equispaced" => Ok(NodeStrategy::Equispaced),
            "halton" => Ok(NodeStrategy::Halton),
            "grid-filtered" | "grid" => Ok(NodeStrategy::GridFiltered),
            other => Err(Error::Config(format!("unknown node strategy {other:?}"))),
        }
    }
}

/// A set of distinct scattered nodes with its regularity measures.
#[derive(Clone, Debug)]
pub struct NodeSet {
    /// Nodes in generation order.
    pub points: Vec<Vec<f64>>,
    /// Discretized fill distance against a default probe grid.
    pub fill: f64,
    /// Half the minimum pairwise distance.
    pub separation: f64,
}

impl NodeSet {
    /// Wraps existing points, computing separation and a default-probe
    /// fill distance.
    pub fn from_points(domain: &Domain, points: Vec<Vec<f64>>) -> Result<NodeSet> {
        let separation = separation_distance(&points)?;
        let probes = domain.evaluation_grid(default_probe_resolution(domain.dimension()))?;
        let fill = fill_distance(&points, &probes)?;
        Ok(NodeSet { points, fill, separation })
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the set holds no nodes.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn default_probe_resolution(d: usize) -> usize {
    match d {
        1 => 1001,
        2 => 61,
        _ => 25,
    }
}

const HALTON_BASES: [u64; 3] = [2, 3, 5];

/// Radical-inverse value of `index` in `base`.
fn halton(mut index: u64, base: u64) -> f64 {
    let mut scale = 1.0;
    let mut value = 0.0;
    while index > 0 {
        scale /= base as f64;
        value += scale * (index % base) as f64;
        index /= base;
    }
    value
}

/// Generates `n` distinct nodes inside the domain.
pub fn generate_nodes(
    domain: &Domain,
    n: usize,
    strategy: NodeStrategy,
    seed: u64,
) -> Result<NodeSet> {
    if n < 2 {
        return Err(Error::Config("node generation needs n >= 2".to_string()));
    }
    let d = domain.dimension();
    let points: Vec<Vec<f64>> = match strategy {
        NodeStrategy::Equispaced => {
            if d != 1 {
                return Err(Error::Config(
                    "equispaced nodes are only defined on intervals".to_string(),
                ));
            }
            let (lo, hi) = domain.bounding_box();
            linspace(lo[0], hi[0], n).into_iter().map(|x| vec![x]).collect()
        }
        NodeStrategy::Halton => {
            let (lo, hi) = domain.bounding_box();
            let mut points = Vec::with_capacity(n);
            let budget = 10_000 + 2_000 * n as u64;
            for k in 0..budget {
                let index = 1 + seed + k;
                let p: Vec<f64> = (0..d)
                    .map(|j| lo[j] + (hi[j] - lo[j]) * halton(index, HALTON_BASES[j]))
                    .collect();
                if domain.contains(&p) {
                    points.push(p);
                    if points.len() == n {
                        break;
                    }
                }
            }
            if points.len() < n {
                return Err(Error::NodeGeneration { requested: n, placed: points.len() });
            }
            points
        }
        NodeStrategy::GridFiltered => {
            let mut resolution =
                2.max((2.0 * n as f64).powf(1.0 / d as f64).ceil() as usize);
            loop {
                let grid = domain.evaluation_grid(resolution)?;
                if grid.len() >= n {
                    break grid.into_iter().take(n).collect();
                }
                if resolution > 4096 {
                    return Err(Error::NodeGeneration { requested: n, placed: grid.len() });
                }
                resolution *= 2;
            }
        }
    };
    NodeSet::from_points(domain, points)
}

/// Discretized fill distance: the largest probe-to-nearest-node distance.
pub fn fill_distance(points: &[Vec<f64>], probes: &[Vec<f64>]) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Domain("fill distance needs a non-empty probe set".to_string()));
    }
    if points.is_empty() {
        return Err(Error::Domain("fill distance needs at least one node".to_string()));
    }
    let mut worst = 0.0f64;
    for probe in probes {
        let mut best = f64::INFINITY;
        for p in points {
            best = best.min(dist(probe, p));
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Half the minimum pairwise node distance.
pub fn separation_distance(points: &[Vec<f64>]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Data("separation distance needs at least two nodes".to_string()));
    }
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = dist(&points[i], &points[j]);
            if d == 0.0 {
                return Err(Error::Data(format!("duplicate nodes at indices {i} and {j}")));
            }
            min = min.min(d);
        }
    }
    Ok(0.5 * min)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * step }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn registry_keys_resolve_and_unknown_keys_are_rejected() {
        for key in [
            "interval01",
            "example3-blade",
            "example4-crescent",
            "example5-annulus",
            "example6-boxes3d",
            "box:0,1;0,1",
            "box:-1,2",
            "box:0,0.3;0,0.9;0,0.3",
        ] {
            let domain = Domain::from_key(key).unwrap();
            assert_eq!(domain.key(), key);
        }
        assert!(Domain::from_key("squiggle").is_err());
        assert!(Domain::from_key("box:1,0").is_err());
        assert!(Domain::from_key("box:0,1;0,1;0,1;0,1").is_err());
        assert!(Domain::from_key("box:0").is_err());
    }

    #[test]
    fn membership_matches_the_defining_inequalities() {
        let blade = Domain::blade();
        assert!(blade.contains(&[0.4, 0.3]));
        assert!(blade.contains(&[0.5, 0.0]));
        assert!(!blade.contains(&[0.99, 0.9]));
        assert!(!blade.contains(&[0.5, 1.2]));

        let crescent = Domain::crescent();
        assert!(crescent.contains(&[0.7, 0.5]));
        assert!(!crescent.contains(&[0.3, 0.5]));
        assert!(!crescent.contains(&[-0.1, 0.5]));

        let annulus = Domain::annulus();
        assert!(annulus.contains(&[0.2, 0.5]));
        assert!(!annulus.contains(&[0.5, 0.5]));
        assert!(!annulus.contains(&[0.99, 0.99]));

        let boxes = Domain::boxes3d();
        assert!(boxes.contains(&[0.1, 0.2, 0.15]));
        assert!(boxes.contains(&[0.1, 0.7, 0.45]));
        assert!(!boxes.contains(&[0.1, 0.2, 0.45]));
        assert!(boxes.contains(&[0.1, 0.5, 0.75]));
        assert!(!boxes.contains(&[0.1, 0.2, 0.75]));
        assert!(!boxes.contains(&[0.4, 0.2, 0.15]));
    }

    #[test]
    fn evaluation_grids_match_frozen_counts() {
        let interval = Domain::from_key("interval01").unwrap();
        let grid = interval.evaluation_grid(200).unwrap();
        assert_eq!(grid.len(), 200);
        assert_eq!(grid[0], vec![0.0]);
        assert_eq!(grid[199], vec![1.0]);

        let square = Domain::from_key("box:0,1;0,1").unwrap();
        assert_eq!(square.evaluation_grid(40).unwrap().len(), 1600);

        assert_eq!(Domain::blade().evaluation_grid(40).unwrap().len(), 1052);
        assert_eq!(Domain::annulus().evaluation_grid(40).unwrap().len(), 992);

        for domain in [Domain::blade(), Domain::crescent(), Domain::annulus()] {
            for p in domain.evaluation_grid(17).unwrap() {
                assert!(domain.contains(&p));
            }
        }
        let boxes = Domain::boxes3d();
        let grid = boxes.evaluation_grid(13).unwrap();
        assert!(!grid.is_empty());
        for p in &grid {
            assert!(boxes.contains(p));
        }
    }

    #[test]
    fn equispaced_nodes_cover_the_interval() {
        let domain = Domain::from_key("interval01").unwrap();
        let nodes = generate_nodes(&domain, 3, NodeStrategy::Equispaced, 0).unwrap();
        assert_eq!(nodes.points, vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert_abs_diff_eq!(nodes.separation, 0.25, epsilon = 1e-15);

        let square = Domain::from_key("box:0,1;0,1").unwrap();
        assert!(generate_nodes(&square, 5, NodeStrategy::Equispaced, 0).is_err());
        assert!(generate_nodes(&domain, 1, NodeStrategy::Equispaced, 0).is_err());
    }

    #[test]
    fn scattered_nodes_satisfy_membership_and_are_deterministic() {
        let square = Domain::from_key("box:0,1;0,1").unwrap();
        let nodes = generate_nodes(&square, 5, NodeStrategy::GridFiltered, 0).unwrap();
        assert_eq!(nodes.len(), 5);
        for p in &nodes.points {
            assert!(square.contains(p));
        }

        let annulus = Domain::annulus();
        let a = generate_nodes(&annulus, 44, NodeStrategy::Halton, 1).unwrap();
        assert_eq!(a.len(), 44);
        for p in &a.points {
            let d2 = (p[0] - 0.5) * (p[0] - 0.5) + (p[1] - 0.5) * (p[1] - 0.5);
            assert!((0.04..=0.25).contains(&d2));
        }
        let b = generate_nodes(&annulus, 44, NodeStrategy::Halton, 1).unwrap();
        assert_eq!(a.points, b.points);
        let c = generate_nodes(&annulus, 44, NodeStrategy::Halton, 2).unwrap();
        assert_ne!(a.points, c.points);

        let boxes = Domain::boxes3d();
        let nodes = generate_nodes(&boxes, 54, NodeStrategy::Halton, 0).unwrap();
        assert_eq!(nodes.len(), 54);
        for p in &nodes.points {
            assert!(boxes.contains(p));
        }
    }

    #[test]
    fn fill_distance_examples() {
        let nodes = vec![vec![0.0], vec![0.5], vec![1.0]];
        let probes: Vec<Vec<f64>> = linspace(0.0, 1.0, 10001).into_iter().map(|x| vec![x]).collect();
        assert_abs_diff_eq!(fill_distance(&nodes, &probes).unwrap(), 0.25, epsilon = 1e-4);
        assert_abs_diff_eq!(
            fill_distance(&[vec![0.5]], &probes).unwrap(),
            0.5,
            epsilon = 1e-4
        );
        assert_eq!(fill_distance(&nodes, &nodes.clone()).unwrap(), 0.0);
        assert!(fill_distance(&nodes, &[]).is_err());
    }

    #[test]
    fn separation_distance_examples() {
        let nodes = vec![vec![0.0], vec![0.5], vec![1.0]];
        assert_abs_diff_eq!(separation_distance(&nodes).unwrap(), 0.25, epsilon = 1e-15);
        let pair = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        assert_abs_diff_eq!(separation_distance(&pair).unwrap(), 2.5, epsilon = 1e-15);
        let ten: Vec<Vec<f64>> = linspace(0.0, 1.0, 10).into_iter().map(|x| vec![x]).collect();
        assert_abs_diff_eq!(separation_distance(&ten).unwrap(), 1.0 / 18.0, epsilon = 1e-14);
        assert!(separation_distance(&[vec![0.5]]).is_err());
        let dup = vec![vec![0.1], vec![0.1]];
        assert!(matches!(separation_distance(&dup), Err(Error::Data(_))));
    }

    #[test]
    fn interval_integration_matches_the_unit_rule() {
        let spec = GradedQuadSpec::default();
        let domain = Domain::from_key("interval01").unwrap();
        let value = domain.integrate_singular(|_, r| r.ln(), &[0.5], &spec).unwrap();
        let direct =
            quadrature::integrate_singular_interval(|_, r| r.ln(), 0.5, &spec).unwrap();
        assert_abs_diff_eq!(value, direct, epsilon = 1e-13);

        // General intervals rescale; integral of ln|2 - t| over [1, 3].
        let wide = Domain::interval(1.0, 3.0).unwrap();
        let value = wide.integrate_singular(|_, r| r.ln(), &[2.0], &spec).unwrap();
        assert_abs_diff_eq!(value, -2.0, epsilon = 1e-11);
        let one = wide.integrate_singular(|_, _| 1.0, &[2.0], &spec).unwrap();
        assert_abs_diff_eq!(one, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn singular_integrals_match_reference_values_on_curved_domains() {
        // References from adaptive quadrature with closed-form inner
        // integrals, accurate to ~1e-12; the square-root kinks of the
        // bound functions at range ends are absorbed by the refined mesh.
        let spec = GradedQuadSpec::default();
        let square = Domain::from_key("box:0,1;0,1").unwrap();
        let value = square
            .integrate_singular(|_, r| r.ln(), &[0.5, 0.5], &spec)
            .unwrap();
        assert_abs_diff_eq!(value, -1.0611754268825244, epsilon = 1e-11);

        let blade = Domain::blade();
        let value = blade
            .integrate_singular(|_, r| r.ln(), &[0.4, 0.3], &spec)
            .unwrap();
        assert_abs_diff_eq!(value, -0.8249160182126374, epsilon = 1e-11);

        let crescent = Domain::crescent();
        let value = crescent
            .integrate_singular(|_, r| r.ln(), &[0.7, 0.5], &spec)
            .unwrap();
        assert_abs_diff_eq!(value, -0.5627482854430687, epsilon = 1e-11);

        let annulus = Domain::annulus();
        let value = annulus
            .integrate_singular(|_, r| r.ln(), &[0.2, 0.5], &spec)
            .unwrap();
        assert_abs_diff_eq!(value, -0.6444282501753936, epsilon = 1e-11);
    }

    #[test]
    fn sheared_union_integration_matches_reference_values() {
        let spec = GradedQuadSpec::new(6, 8, 0.01).unwrap();
        let boxes = Domain::boxes3d();
        let volume = boxes.integrate_singular(|_, _| 1.0, &[0.1, 0.2, 0.15], &spec).unwrap();
        assert_abs_diff_eq!(volume, 0.216, epsilon = 1e-12);

        let value = boxes
            .integrate_singular(|_, r| r.ln(), &[0.1, 0.2, 0.15], &spec)
            .unwrap();
        assert_abs_diff_eq!(value, -0.13175627130647521, epsilon = 1e-5);

        // Singular point inside the sheared bridge: the radius never
        // vanishes and the weights still sum to the union volume.
        let x0 = [0.1, 0.7, 0.45];
        assert!(boxes.contains(&x0));
        let mut min_r = f64::INFINITY;
        let mut total = 0.0;
        boxes.for_each_singular_node(&x0, &spec, |_, w, r| {
            total += w;
            min_r = min_r.min(r);
        });
        assert!(min_r > 0.0);
        assert_abs_diff_eq!(total, 0.216, epsilon = 1e-12);
    }

    #[test]
    fn singular_integration_rejects_non_finite_values() {
        let spec = GradedQuadSpec::new(4, 4, 0.01).unwrap();
        let blade = Domain::blade();
        let err = blade.integrate_singular(|_, _| f64::NAN, &[0.4, 0.3], &spec);
        assert!(matches!(err, Err(Error::NonFiniteIntegrand { .. })));
    }
}
