//! Uniform structured quadrilateral meshes of rectangular domains.
//!
//! Cells are numbered row by row, `i = ix + nx * iy`. Every face is stored
//! once with an owner cell; the stored normal points out of the owner. Faces
//! of periodic axes are paired at build time, so downstream code only sees
//! interior faces and boundary faces.

use std::str::FromStr;

use crate::{Error, Result};

/// 2-point Gauss-Legendre abscissa on [-1, 1].
const GAUSS2: f64 = 0.577_350_269_189_625_8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bounds {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit_square() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryId {
    West,
    East,
    South,
    North,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceNeighbor {
    Cell(usize),
    Boundary(BoundaryId),
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub index: usize,
    pub centroid: [f64; 2],
    pub area: f64,
    /// West, east, south, north.
    pub faces: [usize; 4],
    /// Counterclockwise from the south-west corner.
    pub vertices: [usize; 4],
}

#[derive(Clone, Debug)]
pub struct Face {
    pub owner: usize,
    pub neighbor: FaceNeighbor,
    /// Unit normal pointing out of `owner`.
    pub normal: [f64; 2],
    pub length: f64,
    pub midpoint: [f64; 2],
    pub quad_points: [[f64; 2]; 2],
    pub quad_weights: [f64; 2],
    /// Offset from a point on the face (owner frame) to the same point in the
    /// neighbor's frame. Nonzero only across periodic seams.
    pub neighbor_shift: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.neighbor, FaceNeighbor::Boundary(_))
    }

    pub fn neighbor_cell(&self) -> Option<usize> {
        match self.neighbor {
            FaceNeighbor::Cell(j) => Some(j),
            FaceNeighbor::Boundary(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub periodic: [bool; 2],
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub vertices: Vec<[f64; 2]>,
}

impl Mesh {
    /// Builds a uniform `nx` by `ny` mesh of `bounds`.
    pub fn uniform(bounds: Bounds, nx: usize, ny: usize, periodic: [bool; 2]) -> Result<Self> {
        // A single cell per axis is allowed only without periodic wrap.
        let min = |p: bool| if p { 2 } else { 1 };
        if nx < min(periodic[0]) || ny < min(periodic[1]) {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 cells per periodic axis and 1 otherwise, got {nx}x{ny}"
            )));
        }
        let finite = [bounds.x0, bounds.x1, bounds.y0, bounds.y1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || bounds.x1 <= bounds.x0 || bounds.y1 <= bounds.y0 {
            return Err(Error::InvalidMesh(format!("degenerate extents {bounds:?}")));
        }

        let hx = bounds.width() / nx as f64;
        let hy = bounds.height() / ny as f64;
        let ncells = nx * ny;

        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for vy in 0..=ny {
            for vx in 0..=nx {
                vertices.push([
                    bounds.x0 + vx as f64 * hx,
                    bounds.y0 + vy as f64 * hy,
                ]);
            }
        }

        let mut cells: Vec<Cell> = (0..ncells)
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                let v0 = ix + (nx + 1) * iy;
                Cell {
                    index: i,
                    centroid: [
                        bounds.x0 + (ix as f64 + 0.5) * hx,
                        bounds.y0 + (iy as f64 + 0.5) * hy,
                    ],
                    area: hx * hy,
                    faces: [usize::MAX; 4],
                    vertices: [v0, v0 + 1, v0 + nx + 2, v0 + nx + 1],
                }
            })
            .collect();

        let mut faces = Vec::new();
        let [px, py] = periodic;

        // Vertical faces, x = x0 + k * hx.
        for iy in 0..ny {
            let yc = bounds.y0 + (iy as f64 + 0.5) * hy;
            for k in 0..=nx {
                let x = bounds.x0 + k as f64 * hx;
                let (owner, neighbor, normal, shift) = if k == 0 {
                    if px {
                        // Paired with the east seam below.
                        continue;
                    }
                    (iy * nx, FaceNeighbor::Boundary(BoundaryId::West), [-1.0, 0.0], [0.0; 2])
                } else if k == nx {
                    if px {
                        (
                            iy * nx + nx - 1,
                            FaceNeighbor::Cell(iy * nx),
                            [1.0, 0.0],
                            [-bounds.width(), 0.0],
                        )
                    } else {
                        (
                            iy * nx + nx - 1,
                            FaceNeighbor::Boundary(BoundaryId::East),
                            [1.0, 0.0],
                            [0.0; 2],
                        )
                    }
                } else {
                    (iy * nx + k - 1, FaceNeighbor::Cell(iy * nx + k), [1.0, 0.0], [0.0; 2])
                };
                let d = 0.5 * hy * GAUSS2;
                let f = faces.len();
                faces.push(Face {
                    owner,
                    neighbor,
                    normal,
                    length: hy,
                    midpoint: [x, yc],
                    quad_points: [[x, yc - d], [x, yc + d]],
                    quad_weights: [0.5 * hy, 0.5 * hy],
                    neighbor_shift: shift,
                });
                match (k, neighbor) {
                    (0, _) => cells[owner].faces[0] = f,
                    (_, FaceNeighbor::Cell(j)) => {
                        cells[owner].faces[1] = f;
                        cells[j].faces[0] = f;
                    }
                    (_, FaceNeighbor::Boundary(_)) => cells[owner].faces[1] = f,
                }
            }
        }

        // Horizontal faces, y = y0 + k * hy.
        for k in 0..=ny {
            let y = bounds.y0 + k as f64 * hy;
            for ix in 0..nx {
                let xc = bounds.x0 + (ix as f64 + 0.5) * hx;
                let (owner, neighbor, normal, shift) = if k == 0 {
                    if py {
                        continue;
                    }
                    (ix, FaceNeighbor::Boundary(BoundaryId::South), [0.0, -1.0], [0.0; 2])
                } else if k == ny {
                    if py {
                        (
                            (ny - 1) * nx + ix,
                            FaceNeighbor::Cell(ix),
                            [0.0, 1.0],
                            [0.0, -bounds.height()],
                        )
                    } else {
                        (
                            (ny - 1) * nx + ix,
                            FaceNeighbor::Boundary(BoundaryId::North),
                            [0.0, 1.0],
                            [0.0; 2],
                        )
                    }
                } else {
                    ((k - 1) * nx + ix, FaceNeighbor::Cell(k * nx + ix), [0.0, 1.0], [0.0; 2])
                };
                let d = 0.5 * hx * GAUSS2;
                let f = faces.len();
                faces.push(Face {
                    owner,
                    neighbor,
                    normal,
                    length: hx,
                    midpoint: [xc, y],
                    quad_points: [[xc - d, y], [xc + d, y]],
                    quad_weights: [0.5 * hx, 0.5 * hx],
                    neighbor_shift: shift,
                });
                match (k, neighbor) {
                    (0, _) => cells[owner].faces[2] = f,
                    (_, FaceNeighbor::Cell(j)) => {
                        cells[owner].faces[3] = f;
                        cells[j].faces[2] = f;
                    }
                    (_, FaceNeighbor::Boundary(_)) => cells[owner].faces[3] = f,
                }
            }
        }

        Ok(Self {
            bounds,
            nx,
            ny,
            hx,
            hy,
            periodic,
            cells,
            faces,
            vertices,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    pub fn cell_coords(&self, i: usize) -> (usize, usize) {
        (i % self.nx, i / self.nx)
    }

    /// Cell index at grid position `(ix, iy)`, wrapping periodic axes.
    pub fn cell_at(&self, ix: isize, iy: isize) -> Option<usize> {
        let wrap = |k: isize, n: usize, periodic: bool| -> Option<usize> {
            if (0..n as isize).contains(&k) {
                Some(k as usize)
            } else if periodic {
                Some(k.rem_euclid(n as isize) as usize)
            } else {
                None
            }
        };
        let ix = wrap(ix, self.nx, self.periodic[0])?;
        let iy = wrap(iy, self.ny, self.periodic[1])?;
        Some(ix + self.nx * iy)
    }

    /// Index of the cell containing `x` (points on the closure are clamped).
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let b = &self.bounds;
        let tol = 1e-12 * (b.width() + b.height());
        if x[0] < b.x0 - tol || x[0] > b.x1 + tol || x[1] < b.y0 - tol || x[1] > b.y1 + tol {
            return None;
        }
        let ix = (((x[0] - b.x0) / self.hx).floor() as isize).clamp(0, self.nx as isize - 1);
        let iy = (((x[1] - b.y0) / self.hy).floor() as isize).clamp(0, self.ny as isize - 1);
        Some(ix as usize + self.nx * iy as usize)
    }

    /// Sign of the stored face normal as seen from cell `i` (+1 for the owner).
    #[inline]
    pub fn face_sign(&self, face: usize, i: usize) -> f64 {
        if self.faces[face].owner == i {
            1.0
        } else {
            -1.0
        }
    }

    /// Cell on the other side of `face` as seen from `i`, if any.
    #[inline]
    pub fn across(&self, face: usize, i: usize) -> Option<usize> {
        let f = &self.faces[face];
        if f.owner == i {
            f.neighbor_cell()
        } else {
            Some(f.owner)
        }
    }

    pub fn perimeter(&self, i: usize) -> f64 {
        self.cells[i].faces.iter().map(|&f| self.faces[f].length).sum()
    }

    /// Diagonal of the Taylor-basis mass matrix: `|K|`, `∫(x-x̄)²`, `∫(y-ȳ)²`.
    pub fn taylor_mass(&self, i: usize) -> [f64; 3] {
        let a = self.cells[i].area;
        [a, a * self.hx * self.hx / 12.0, a * self.hy * self.hy / 12.0]
    }

    /// Cells sharing at least one vertex with `i`, excluding `i`.
    pub fn common_vertex_neighbors(&self, i: usize) -> Vec<usize> {
        let (ix, iy) = self.cell_coords(i);
        let mut out = Vec::with_capacity(8);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                if let Some(j) = self.cell_at(ix as isize + dx, iy as isize + dy) {
                    if j != i && !out.contains(&j) {
                        out.push(j);
                    }
                }
            }
        }
        out
    }

    /// Identifies vertices on periodic seams with their counterpart at the
    /// low end of the axis.
    pub fn canonical_vertex(&self, v: usize) -> usize {
        let (mut vx, mut vy) = (v % (self.nx + 1), v / (self.nx + 1));
        if self.periodic[0] && vx == self.nx {
            vx = 0;
        }
        if self.periodic[1] && vy == self.ny {
            vy = 0;
        }
        vx + (self.nx + 1) * vy
    }

    /// Cells meeting at vertex `v`.
    pub fn vertex_adjacent_cells(&self, v: usize) -> Vec<usize> {
        let (vx, vy) = (v % (self.nx + 1), v / (self.nx + 1));
        let mut out = Vec::with_capacity(4);
        for (dx, dy) in [(-1, -1), (0, -1), (-1, 0), (0, 0)] {
            if let Some(j) = self.cell_at(vx as isize + dx, vy as isize + dy) {
                if !out.contains(&j) {
                    out.push(j);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilMode {
    /// Common-vertex neighborhood for every index k.
    Isotropic,
    /// Cell-average bounds from the same row; derivative stencils from
    /// horizontal (k=1) and vertical (k=2) face neighbors.
    LayeredHorizontal,
    /// Cell-average bounds from the same column; derivative stencils as in
    /// the horizontal variant.
    LayeredVertical,
    Custom,
}

impl FromStr for StencilMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isotropic" => Ok(Self::Isotropic),
            "layered" | "layered-horizontal" => Ok(Self::LayeredHorizontal),
            "layered-vertical" => Ok(Self::LayeredVertical),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Config(format!(
                "unknown stencil mode '{other}' (expected isotropic|layered|layered-horizontal|layered-vertical)"
            ))),
        }
    }
}

impl std::fmt::Display for StencilMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Isotropic => "isotropic",
            Self::LayeredHorizontal => "layered-horizontal",
            Self::LayeredVertical => "layered-vertical",
            Self::Custom => "custom",
        })
    }
}

fn row_neighbors(mesh: &Mesh, i: usize, horizontal: bool) -> Vec<usize> {
    let (ix, iy) = mesh.cell_coords(i);
    let (ix, iy) = (ix as isize, iy as isize);
    let mut out = vec![i];
    for d in [-1, 1] {
        let j = if horizontal {
            mesh.cell_at(ix + d, iy)
        } else {
            mesh.cell_at(ix, iy + d)
        };
        if let Some(j) = j {
            if !out.contains(&j) {
                out.push(j);
            }
        }
    }
    out
}

/// Bounding stencil `J_ik` of cell `i` for coefficient `k` (0 = average,
/// 1 = x-derivative, 2 = y-derivative). Always contains `i`.
pub fn bounding_stencil(mesh: &Mesh, i: usize, k: usize, mode: StencilMode) -> Result<Vec<usize>> {
    if k > 2 {
        return Err(Error::Config(format!("stencil index k={k} out of range")));
    }
    match mode {
        StencilMode::Isotropic => {
            let mut s = vec![i];
            s.extend(mesh.common_vertex_neighbors(i));
            Ok(s)
        }
        StencilMode::LayeredHorizontal | StencilMode::LayeredVertical => Ok(match k {
            0 => row_neighbors(mesh, i, mode == StencilMode::LayeredHorizontal),
            1 => row_neighbors(mesh, i, true),
            _ => row_neighbors(mesh, i, false),
        }),
        StencilMode::Custom => Err(Error::Config(
            "custom stencils must be supplied through StencilTable::custom".into(),
        )),
    }
}

/// Compressed per-cell index sets.
#[derive(Clone, Debug)]
struct Csr {
    offsets: Vec<usize>,
    indices: Vec<usize>,
}

impl Csr {
    fn from_sets(sets: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut offsets = vec![0];
        let mut indices = Vec::new();
        for s in sets {
            indices.extend(s);
            offsets.push(indices.len());
        }
        Self { offsets, indices }
    }

    #[inline]
    fn get(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Bounding stencils `J_i0`, `J_i1`, `J_i2` for every cell.
#[derive(Clone, Debug)]
pub struct StencilTable {
    pub mode: StencilMode,
    sets: [Csr; 3],
}

impl StencilTable {
    pub fn new(mesh: &Mesh, mode: StencilMode) -> Result<Self> {
        let build = |k: usize| -> Result<Csr> {
            let sets = (0..mesh.num_cells())
                .map(|i| bounding_stencil(mesh, i, k, mode))
                .collect::<Result<Vec<_>>>()?;
            Ok(Csr::from_sets(sets))
        };
        Ok(Self {
            mode,
            sets: [build(0)?, build(1)?, build(2)?],
        })
    }

    /// User-defined stencils; each set gets `i` added if missing.
    pub fn custom(mesh: &Mesh, sets: [Vec<Vec<usize>>; 3]) -> Result<Self> {
        let n = mesh.num_cells();
        let mut built = Vec::with_capacity(3);
        for (k, per_cell) in sets.into_iter().enumerate() {
            if per_cell.len() != n {
                return Err(Error::Config(format!(
                    "custom stencil J_{k} has {} entries for {n} cells",
                    per_cell.len()
                )));
            }
            let mut fixed = Vec::with_capacity(n);
            for (i, mut s) in per_cell.into_iter().enumerate() {
                if let Some(&bad) = s.iter().find(|&&j| j >= n) {
                    return Err(Error::Config(format!(
                        "custom stencil J_{k} of cell {i} references missing cell {bad}"
                    )));
                }
                if !s.contains(&i) {
                    s.insert(0, i);
                }
                fixed.push(s);
            }
            built.push(Csr::from_sets(fixed));
        }
        let mut it = built.into_iter();
        Ok(Self {
            mode: StencilMode::Custom,
            sets: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
        })
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> &[usize] {
        self.sets[k].get(i)
    }
}
