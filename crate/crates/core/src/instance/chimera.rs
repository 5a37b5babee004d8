use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sites in one K4,4 unit cell.
pub const CELL_SITES: usize = 8;
/// Sites per side of a unit cell.
pub const SIDE_SLOTS: usize = 4;

/// Which half of the bipartite K4,4 cell a site lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left = 0,
    Right = 1,
}

/// Position of a unit cell in the chimera grid. Serialized as `[row, col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CellCoord {
    pub row: usize,
    pub col: usize,
}

impl CellCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        CellCoord { row, col }
    }

    /// Whether `other` shares a cell boundary with `self` (4-neighbourhood).
    pub fn is_adjacent(self, other: CellCoord) -> bool {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col) == 1
    }
}

impl From<[usize; 2]> for CellCoord {
    fn from(v: [usize; 2]) -> Self {
        CellCoord::new(v[0], v[1])
    }
}

impl From<CellCoord> for [usize; 2] {
    fn from(c: CellCoord) -> Self {
        [c.row, c.col]
    }
}

impl std::fmt::Display for CellCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Full address of a chimera site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChimeraCoord {
    pub cell_row: usize,
    pub cell_col: usize,
    pub side: Side,
    pub slot: usize,
}

/// A `rows x cols` grid of K4,4 unit cells.
///
/// Horizontally adjacent cells are joined through equal-slot left-side
/// sites, vertically adjacent cells through equal-slot right-side sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chimera {
    rows: usize,
    cols: usize,
}

impl Chimera {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "chimera grid needs at least one cell, got {rows}x{cols}"
            )));
        }
        Ok(Chimera { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_sites(&self) -> usize {
        self.num_cells() * CELL_SITES
    }

    pub fn contains(&self, cell: CellCoord) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    pub fn cell_index(&self, cell: CellCoord) -> usize {
        cell.row * self.cols + cell.col
    }

    /// Linear site id `((row*cols + col)*2 + side)*4 + slot`.
    pub fn site(&self, c: ChimeraCoord) -> usize {
        ((c.cell_row * self.cols + c.cell_col) * 2 + c.side as usize) * SIDE_SLOTS + c.slot
    }

    pub fn coord(&self, site: usize) -> ChimeraCoord {
        let slot = site % SIDE_SLOTS;
        let side = if (site / SIDE_SLOTS) % 2 == 0 {
            Side::Left
        } else {
            Side::Right
        };
        let cell = site / CELL_SITES;
        ChimeraCoord {
            cell_row: cell / self.cols,
            cell_col: cell % self.cols,
            side,
            slot,
        }
    }

    /// The 16 bipartite edges inside `cell`, as chimera site pairs.
    pub fn intra_cell_edges(&self, cell: CellCoord) -> Vec<(usize, usize)> {
        let base = self.cell_index(cell) * CELL_SITES;
        let mut edges = Vec::with_capacity(SIDE_SLOTS * SIDE_SLOTS);
        for l in 0..SIDE_SLOTS {
            for r in 0..SIDE_SLOTS {
                edges.push((base + l, base + SIDE_SLOTS + r));
            }
        }
        edges
    }

    /// The four equal-slot couplers joining two adjacent cells, or `None`
    /// when the cells do not share a boundary.
    pub fn inter_cell_edges(&self, a: CellCoord, b: CellCoord) -> Option<[(usize, usize); 4]> {
        if !a.is_adjacent(b) || !self.contains(a) || !self.contains(b) {
            return None;
        }
        let side = if a.row == b.row { Side::Left } else { Side::Right };
        let mut out = [(0, 0); 4];
        for (slot, e) in out.iter_mut().enumerate() {
            let sa = self.site(ChimeraCoord {
                cell_row: a.row,
                cell_col: a.col,
                side,
                slot,
            });
            let sb = self.site(ChimeraCoord {
                cell_row: b.row,
                cell_col: b.col,
                side,
                slot,
            });
            *e = (sa.min(sb), sa.max(sb));
        }
        Some(out)
    }

    /// Every edge of the graph, sorted ascending with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for row in 0..self.rows {
            for col in 0..self.cols {
                let cell = CellCoord::new(row, col);
                edges.extend(self.intra_cell_edges(cell));
                if col + 1 < self.cols {
                    edges.extend(self.inter_cell_edges(cell, CellCoord::new(row, col + 1)).unwrap());
                }
                if row + 1 < self.rows {
                    edges.extend(self.inter_cell_edges(cell, CellCoord::new(row + 1, col)).unwrap());
                }
            }
        }
        edges.sort_unstable();
        edges
    }
}

/// Edge list of a chimera graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraGraph {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn build_chimera(rows: usize, cols: usize) -> Result<ChimeraGraph> {
    let chimera = Chimera::new(rows, cols)?;
    Ok(ChimeraGraph {
        rows,
        cols,
        n: chimera.num_sites(),
        edges: chimera.edges(),
    })
}
