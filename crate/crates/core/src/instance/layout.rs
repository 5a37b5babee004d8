use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chimera::{CellCoord, Chimera, CELL_SITES};
use super::oracle::{brute_force_ground_state, BRUTE_FORCE_LIMIT};
use super::{Coupling, ProblemInstance, ReferenceMethod};
use crate::error::{Error, Result};
use crate::mcmc::RngStream;

/// Scale that turns the default weak-field ratio 11/25 into integers.
pub const DEFAULT_SCALE: i64 = 25;

/// A strong cell and the weak cell it is ferromagnetically bound to.
/// Serialized as `[strong, weak]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[CellCoord; 2]", into = "[CellCoord; 2]")]
pub struct ClusterPair {
    pub strong: CellCoord,
    pub weak: CellCoord,
}

impl From<[CellCoord; 2]> for ClusterPair {
    fn from(v: [CellCoord; 2]) -> Self {
        ClusterPair {
            strong: v[0],
            weak: v[1],
        }
    }
}

impl From<ClusterPair> for [CellCoord; 2] {
    fn from(p: ClusterPair) -> Self {
        [p.strong, p.weak]
    }
}

/// A spin-glass coupling between the strong cells of two pairs.
/// `sign = None` means "draw at generation time". Serialized as `[a, b, sign]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(CellCoord, CellCoord, Option<i8>)", into = "(CellCoord, CellCoord, Option<i8>)")]
pub struct BackboneEdge {
    pub a: CellCoord,
    pub b: CellCoord,
    pub sign: Option<i8>,
}

impl From<(CellCoord, CellCoord, Option<i8>)> for BackboneEdge {
    fn from(v: (CellCoord, CellCoord, Option<i8>)) -> Self {
        BackboneEdge {
            a: v.0,
            b: v.1,
            sign: v.2,
        }
    }
}

impl From<BackboneEdge> for (CellCoord, CellCoord, Option<i8>) {
    fn from(e: BackboneEdge) -> Self {
        (e.a, e.b, e.sign)
    }
}

/// Placement of weak-strong cluster pairs on a chimera grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakStrongLayout {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub pairs: Vec<ClusterPair>,
    pub backbone_edges: Vec<BackboneEdge>,
    pub lambda_num: u32,
    pub lambda_den: u32,
}

impl WeakStrongLayout {
    /// One pair: weak cell on top, strong cell below it.
    pub fn single_pair() -> Self {
        Self::pair_grid(1, 1).expect("1x1 pair grid is valid")
    }

    /// `pair_rows x pair_cols` pairs filling a `2*pair_rows x pair_cols` cell grid.
    ///
    /// Each pair is stacked vertically. Pair rows alternate orientation
    /// (weak over strong, then strong over weak) so that the strong cells of
    /// pair rows `2k` and `2k+1` touch; the backbone contains every
    /// grid-adjacent strong/strong cell boundary with its sign left undrawn.
    pub fn pair_grid(pair_rows: usize, pair_cols: usize) -> Result<Self> {
        if pair_rows == 0 || pair_cols == 0 {
            return Err(Error::invalid(format!(
                "pair grid needs at least one pair, got {pair_rows}x{pair_cols}"
            )));
        }
        let strong_row = |pr: usize| if pr % 2 == 0 { 2 * pr + 1 } else { 2 * pr };
        let weak_row = |pr: usize| if pr % 2 == 0 { 2 * pr } else { 2 * pr + 1 };
        let mut pairs = Vec::with_capacity(pair_rows * pair_cols);
        for pr in 0..pair_rows {
            for pc in 0..pair_cols {
                pairs.push(ClusterPair {
                    strong: CellCoord::new(strong_row(pr), pc),
                    weak: CellCoord::new(weak_row(pr), pc),
                });
            }
        }
        let strong: HashSet<CellCoord> = pairs.iter().map(|p| p.strong).collect();
        let mut backbone_edges = Vec::new();
        for p in &pairs {
            let a = p.strong;
            for b in [CellCoord::new(a.row, a.col + 1), CellCoord::new(a.row + 1, a.col)] {
                if strong.contains(&b) {
                    backbone_edges.push(BackboneEdge { a, b, sign: None });
                }
            }
        }
        let layout = WeakStrongLayout {
            grid_rows: 2 * pair_rows,
            grid_cols: pair_cols,
            pairs,
            backbone_edges,
            lambda_num: 11,
            lambda_den: 25,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// The most square pair grid holding exactly `pairs` pairs.
    pub fn for_pair_count(pairs: usize) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::invalid("pair count must be at least 1"));
        }
        let mut rows = (pairs as f64).sqrt().floor() as usize;
        while pairs % rows != 0 {
            rows -= 1;
        }
        Self::pair_grid(rows, pairs / rows)
    }

    pub fn chimera(&self) -> Result<Chimera> {
        Chimera::new(self.grid_rows, self.grid_cols)
    }

    pub fn validate(&self) -> Result<()> {
        let chimera = self.chimera()?;
        if self.lambda_den == 0 || 2 * self.lambda_num >= self.lambda_den {
            return Err(Error::invalid(format!(
                "weak-field ratio {}/{} must be below 1/2",
                self.lambda_num, self.lambda_den
            )));
        }
        if self.pairs.is_empty() {
            return Err(Error::invalid("layout has no cluster pairs"));
        }
        let mut owner: HashMap<CellCoord, usize> = HashMap::new();
        for (k, p) in self.pairs.iter().enumerate() {
            for cell in [p.strong, p.weak] {
                if !chimera.contains(cell) {
                    return Err(Error::invalid(format!(
                        "pair {k}: cell {cell} outside the {}x{} grid",
                        self.grid_rows, self.grid_cols
                    )));
                }
                if let Some(other) = owner.insert(cell, k) {
                    return Err(Error::invalid(format!(
                        "cell {cell} belongs to pairs {other} and {k}"
                    )));
                }
            }
            if !p.strong.is_adjacent(p.weak) {
                return Err(Error::invalid(format!(
                    "pair {k}: cells {} and {} are not grid-adjacent",
                    p.strong, p.weak
                )));
            }
        }
        let strong_owner: HashMap<CellCoord, usize> = self
            .pairs
            .iter()
            .enumerate()
            .map(|(k, p)| (p.strong, k))
            .collect();
        let mut seen = HashSet::new();
        for (k, e) in self.backbone_edges.iter().enumerate() {
            let (pa, pb) = match (strong_owner.get(&e.a), strong_owner.get(&e.b)) {
                (Some(&pa), Some(&pb)) => (pa, pb),
                _ => {
                    return Err(Error::invalid(format!(
                        "backbone edge {k}: {} - {} must join two strong cells",
                        e.a, e.b
                    )))
                }
            };
            if pa == pb {
                return Err(Error::invalid(format!("backbone edge {k} joins a pair to itself")));
            }
            if !e.a.is_adjacent(e.b) {
                return Err(Error::invalid(format!(
                    "backbone edge {k}: cells {} and {} are not grid-adjacent",
                    e.a, e.b
                )));
            }
            if let Some(s) = e.sign {
                if s != 1 && s != -1 {
                    return Err(Error::invalid(format!("backbone edge {k}: sign {s} is not +1 or -1")));
                }
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(Error::invalid(format!("backbone edge {k} duplicates an earlier edge")));
            }
        }
        Ok(())
    }

    /// Cells in use, in row-major order. Site `8*k + side*4 + slot` of an
    /// instance belongs to the `k`-th entry.
    pub fn used_cells(&self) -> Vec<CellCoord> {
        let mut cells: Vec<CellCoord> = self.pairs.iter().flat_map(|p| [p.strong, p.weak]).collect();
        cells.sort_unstable();
        cells
    }

    pub fn num_sites(&self) -> usize {
        CELL_SITES * 2 * self.pairs.len()
    }

    /// Instance site ids of each used cell, in [`Self::used_cells`] order.
    pub fn cell_sites(&self) -> Vec<(CellCoord, [usize; CELL_SITES])> {
        self.used_cells()
            .into_iter()
            .enumerate()
            .map(|(k, c)| (c, std::array::from_fn(|s| k * CELL_SITES + s)))
            .collect()
    }

    /// Scaled weak field `lambda * scale`, if it is an integer.
    pub fn weak_field(&self, scale: i64) -> Option<i64> {
        let num = self.lambda_num as i64 * scale;
        (num % self.lambda_den as i64 == 0).then(|| num / self.lambda_den as i64)
    }

    fn default_scale(&self) -> i64 {
        if self.weak_field(DEFAULT_SCALE).is_some() {
            DEFAULT_SCALE
        } else {
            self.lambda_den as i64
        }
    }
}

/// Builds the weak-strong cluster network for `layout`.
///
/// Every unset backbone sign is drawn uniformly from a stream seeded by
/// `backbone_seed`, in edge order; the returned instance carries the layout
/// with all signs filled in. The reference energy is the all-down energy,
/// replaced by the exhaustive minimum when the instance is small enough.
pub fn generate_network(layout: &WeakStrongLayout, backbone_seed: u64) -> Result<ProblemInstance> {
    layout.validate()?;
    let scale = layout.default_scale();
    let weak_h = layout
        .weak_field(scale)
        .ok_or_else(|| Error::invalid("weak field is not an integer at the chosen scale"))?;

    let mut realized = layout.clone();
    let mut rng = RngStream::from_parts(backbone_seed, 0, 0);
    for e in &mut realized.backbone_edges {
        if e.sign.is_none() {
            e.sign = Some(if rng.random::<bool>() { 1 } else { -1 });
        }
    }

    let chimera = realized.chimera()?;
    let cells = realized.used_cells();
    let mut compact: HashMap<usize, usize> = HashMap::with_capacity(cells.len() * CELL_SITES);
    for (k, &cell) in cells.iter().enumerate() {
        let base = chimera.cell_index(cell) * CELL_SITES;
        for s in 0..CELL_SITES {
            compact.insert(base + s, k * CELL_SITES + s);
        }
    }
    let map = |(a, b): (usize, usize)| {
        let (x, y) = (compact[&a], compact[&b]);
        (x.min(y), x.max(y))
    };

    let n = cells.len() * CELL_SITES;
    let mut couplings = Vec::new();
    let mut fields = vec![0i64; n];
    for &cell in &cells {
        for e in chimera.intra_cell_edges(cell) {
            let (i, j) = map(e);
            couplings.push(Coupling::new(i, j, scale));
        }
    }
    for p in &realized.pairs {
        for e in chimera.inter_cell_edges(p.strong, p.weak).expect("validated adjacency") {
            let (i, j) = map(e);
            couplings.push(Coupling::new(i, j, scale));
        }
        let strong_base = compact[&(chimera.cell_index(p.strong) * CELL_SITES)];
        let weak_base = compact[&(chimera.cell_index(p.weak) * CELL_SITES)];
        for s in 0..CELL_SITES {
            fields[strong_base + s] = -scale;
            fields[weak_base + s] = weak_h;
        }
    }
    for e in &realized.backbone_edges {
        let sign = e.sign.expect("signs realized above") as i64;
        for edge in chimera.inter_cell_edges(e.a, e.b).expect("validated adjacency") {
            let (i, j) = map(edge);
            couplings.push(Coupling::new(i, j, sign * scale));
        }
    }

    let instance = ProblemInstance::new(n, scale, couplings, fields)?.with_layout(Some(realized));
    let all_down = instance.energy_unchecked(&instance.all_down());
    let (reference, method) = if n <= BRUTE_FORCE_LIMIT {
        let (e, _) = brute_force_ground_state(&instance)?;
        (e, ReferenceMethod::Exhaustive)
    } else {
        (all_down, ReferenceMethod::Construction)
    };
    Ok(instance.with_reference(Some(reference), method))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_structure() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 1).unwrap();
        assert_eq!(inst.n(), 16);
        assert_eq!(inst.couplings().len(), 36);
        assert!(inst.couplings().iter().all(|c| c.value == 25));
        assert_eq!(inst.fields().iter().filter(|&&h| h == -25).count(), 8);
        assert_eq!(inst.fields().iter().filter(|&&h| h == 11).count(), 8);
        assert_eq!(inst.reference_method(), ReferenceMethod::Exhaustive);
        assert_eq!(inst.reference_energy_scaled(), Some(-1012));
    }

    #[test]
    fn single_pair_minima() {
        let inst = generate_network(&WeakStrongLayout::single_pair(), 1).unwrap();
        let down = inst.all_down();
        assert_eq!(inst.energy(&down).unwrap(), -1012);
        let mut weak_up = down.clone();
        for (k, &h) in inst.fields().iter().enumerate() {
            if h > 0 {
                weak_up[k] = 1;
            }
        }
        assert_eq!(inst.energy(&weak_up).unwrap(), -988);
    }

    #[test]
    fn grid_layouts() {
        for (p, rows, cols) in [(1, 1, 1), (4, 2, 2), (9, 3, 3), (14, 2, 7), (16, 4, 4), (25, 5, 5)] {
            let l = WeakStrongLayout::for_pair_count(p).unwrap();
            assert_eq!((l.grid_rows, l.grid_cols), (2 * rows, cols));
            assert_eq!(l.num_sites(), 16 * p);
            let inst = generate_network(&l, 3).unwrap();
            assert_eq!(inst.n(), 16 * p);
            assert!(inst.couplings().iter().all(|c| c.value.abs() == 25));
            assert!(inst.fields().iter().all(|&h| h == -25 || h == 11));
        }
        // 2x2 pairs: strong cells form a 4-cycle.
        assert_eq!(WeakStrongLayout::for_pair_count(4).unwrap().backbone_edges.len(), 4);
    }

    #[test]
    fn backbone_signs_are_seeded() {
        let l = WeakStrongLayout::for_pair_count(9).unwrap();
        let a = generate_network(&l, 5).unwrap();
        let b = generate_network(&l, 5).unwrap();
        assert_eq!(a, b);
        let signs: Vec<_> = a.layout().unwrap().backbone_edges.iter().map(|e| e.sign).collect();
        assert!(signs.iter().all(|s| matches!(s, Some(1) | Some(-1))));
        let c = generate_network(&l, 6).unwrap();
        assert_ne!(a.couplings(), c.couplings());
    }

    #[test]
    fn preset_signs_are_kept() {
        let mut l = WeakStrongLayout::for_pair_count(4).unwrap();
        for e in &mut l.backbone_edges {
            e.sign = Some(-1);
        }
        let inst = generate_network(&l, 0).unwrap();
        assert_eq!(inst.couplings().iter().filter(|c| c.value == -25).count(), 16);
    }

    #[test]
    fn invalid_layouts() {
        let mut l = WeakStrongLayout::single_pair();
        l.lambda_num = 13;
        assert!(l.validate().is_err());

        let mut l = WeakStrongLayout::single_pair();
        l.pairs[0].weak = CellCoord::new(0, 0);
        l.pairs[0].strong = CellCoord::new(0, 0);
        assert!(l.validate().is_err());

        let mut l = WeakStrongLayout::for_pair_count(2).unwrap();
        l.pairs[1].weak = CellCoord::new(1, 0);
        assert!(l.validate().is_err());

        let mut l = WeakStrongLayout::for_pair_count(4).unwrap();
        l.backbone_edges[0].b = l.pairs[0].weak;
        assert!(l.validate().is_err());

        let mut l = WeakStrongLayout::for_pair_count(4).unwrap();
        l.backbone_edges[0].sign = Some(2);
        assert!(l.validate().is_err());
    }
}
