//! Square-tiled surfaces as glued unit cells.
//!
//! A surface is `n` unit squares with a fixed-point-free involution on the
//! `4n` cell sides. Side `4*cell + dir` with `dir` in right=0, top=1, left=2,
//! bottom=3. A side couple is glued by translation (`flip = false`, pairing
//! right with left or top with bottom) or by a half turn (`flip = true`,
//! pairing sides of the same direction; the left endpoint of one side meets
//! the right endpoint of the other).
//!
//! Cone angles come from corner walks: each cell corner spans an angle of
//! pi/2 around its vertex, and the walk crosses one side per step, so a
//! vertex with a walk cycle of length `L` has cone angle `L*pi/2`. The axis
//! rules force `L` to be even, giving angles in multiples of pi; the
//! quadratic order of such a vertex is `L/2 - 2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RIGHT: usize = 0;
pub const TOP: usize = 1;
pub const LEFT: usize = 2;
pub const BOTTOM: usize = 3;

pub fn side(cell: usize, dir: usize) -> usize {
    4 * cell + dir
}

/// One glued side couple, as it appears in surface files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: usize,
    pub b: usize,
    pub flip: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<i64>,
}

impl Gluing {
    pub fn new(a: usize, b: usize, flip: bool) -> Self {
        Gluing {
            a,
            b,
            flip,
            weight: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("side {side} is out of range for {cells} cells")]
    SideOutOfRange { side: usize, cells: usize },
    #[error("side {side} appears in more than one gluing")]
    NotInvolution { side: usize },
    #[error("side {side} is glued to itself")]
    FixedSide { side: usize },
    #[error("side {side} has no gluing")]
    UnpairedSide { side: usize },
    #[error("sides {a} and {b} cannot be glued with flip={flip}")]
    AxisMismatch { a: usize, b: usize, flip: bool },
    #[error("cell adjacency graph is disconnected")]
    Disconnected,
    #[error("corner cycle through corner {corner} has odd length {len}")]
    OddHalfAngle { corner: usize, len: usize },
}

/// A vertex of the glued complex: the cycle of cell corners around it, in
/// walk order starting from the smallest corner index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClass {
    pub corners: Vec<usize>,
}

impl VertexClass {
    /// Cone angle in multiples of pi.
    pub fn angle_pi(&self) -> i64 {
        self.corners.len() as i64 / 2
    }

    /// Quadratic order: angle/pi - 2. Poles are -1, regular points 0.
    pub fn order(&self) -> i64 {
        self.angle_pi() - 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellComplexSurface {
    n: usize,
    pairing: Vec<usize>,
    flip: Vec<bool>,
    weight: Vec<Option<i64>>,
    corner_tag: Vec<Option<u32>>,
    marked_corner: Vec<bool>,
    vertices: Vec<VertexClass>,
    corner_vertex: Vec<usize>,
}

impl CellComplexSurface {
    /// Validate a gluing table and compute the vertex structure.
    pub fn build(n: usize, gluings: &[Gluing]) -> Result<Self, SurfaceError> {
        Self::build_inner(n, gluings, false)
    }

    /// Orientation doubles of translation surfaces fall apart into two
    /// components; this entry point keeps them buildable.
    pub(crate) fn build_components_allowed(
        n: usize,
        gluings: &[Gluing],
    ) -> Result<Self, SurfaceError> {
        Self::build_inner(n, gluings, true)
    }

    fn build_inner(
        n: usize,
        gluings: &[Gluing],
        allow_disconnected: bool,
    ) -> Result<Self, SurfaceError> {
        let sides = 4 * n;
        let mut pairing = vec![usize::MAX; sides];
        let mut flip = vec![false; sides];
        let mut weight = vec![None; sides];
        for g in gluings {
            for &s in [g.a, g.b].iter() {
                if s >= sides {
                    return Err(SurfaceError::SideOutOfRange { side: s, cells: n });
                }
            }
            if g.a == g.b {
                return Err(SurfaceError::FixedSide { side: g.a });
            }
            for &s in [g.a, g.b].iter() {
                if pairing[s] != usize::MAX {
                    return Err(SurfaceError::NotInvolution { side: s });
                }
            }
            let (da, db) = (g.a % 4, g.b % 4);
            let ok = if g.flip {
                da == db
            } else {
                da == (db + 2) % 4
            };
            if !ok {
                return Err(SurfaceError::AxisMismatch {
                    a: g.a,
                    b: g.b,
                    flip: g.flip,
                });
            }
            pairing[g.a] = g.b;
            pairing[g.b] = g.a;
            flip[g.a] = g.flip;
            flip[g.b] = g.flip;
            weight[g.a] = g.weight;
            weight[g.b] = g.weight;
        }
        if let Some(s) = pairing.iter().position(|&p| p == usize::MAX) {
            return Err(SurfaceError::UnpairedSide { side: s });
        }

        // connectivity over cells
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for d in 0..4 {
                let j = pairing[side(i, d)] / 4;
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if !allow_disconnected && seen.iter().any(|&s| !s) {
            return Err(SurfaceError::Disconnected);
        }

        let mut surface = CellComplexSurface {
            n,
            pairing,
            flip,
            weight,
            corner_tag: vec![None; sides],
            marked_corner: vec![false; sides],
            vertices: Vec::new(),
            corner_vertex: vec![usize::MAX; sides],
        };
        surface.compute_vertices()?;
        Ok(surface)
    }

    fn compute_vertices(&mut self) -> Result<(), SurfaceError> {
        let sides = 4 * self.n;
        let mut visited = vec![false; sides];
        let mut vertices = Vec::new();
        for start in 0..sides {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut c = start;
            loop {
                visited[c] = true;
                cycle.push(c);
                c = self.next_corner(c);
                if c == start {
                    break;
                }
            }
            if cycle.len() % 2 != 0 {
                return Err(SurfaceError::OddHalfAngle {
                    corner: start,
                    len: cycle.len(),
                });
            }
            vertices.push(VertexClass { corners: cycle });
        }
        vertices.sort_by_key(|v| v.corners[0]);
        let mut corner_vertex = vec![usize::MAX; sides];
        for (id, v) in vertices.iter().enumerate() {
            for &c in &v.corners {
                corner_vertex[c] = id;
            }
        }
        self.vertices = vertices;
        self.corner_vertex = corner_vertex;
        Ok(())
    }

    /// One step of the counterclockwise walk around the vertex at a corner:
    /// sweep through the cell, cross the side two past the corner direction,
    /// land on the matching endpoint corner of the partner side.
    pub fn next_corner(&self, corner: usize) -> usize {
        let (cell, c) = (corner / 4, corner % 4);
        let exit = side(cell, (c + 2) % 4);
        let partner = self.pairing[exit];
        4 * (partner / 4) + (partner % 4 + 1) % 4
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    pub fn pairing(&self, s: usize) -> usize {
        self.pairing[s]
    }

    pub fn is_flip(&self, s: usize) -> bool {
        self.flip[s]
    }

    pub fn has_flips(&self) -> bool {
        self.flip.iter().any(|&f| f)
    }

    pub fn weight_at(&self, s: usize) -> Option<i64> {
        self.weight[s]
    }

    pub fn set_weight(&mut self, s: usize, w: Option<i64>) {
        let p = self.pairing[s];
        self.weight[s] = w;
        self.weight[p] = w;
    }

    /// Canonical id of the couple containing a side: the smaller side index.
    pub fn couple_id(&self, s: usize) -> usize {
        s.min(self.pairing[s])
    }

    pub fn couples(&self) -> Vec<usize> {
        (0..4 * self.n).filter(|&s| s < self.pairing[s]).collect()
    }

    pub fn vertices(&self) -> &[VertexClass] {
        &self.vertices
    }

    pub fn vertex_of_corner(&self, corner: usize) -> usize {
        self.corner_vertex[corner]
    }

    pub fn tag_of_corner(&self, corner: usize) -> Option<u32> {
        self.corner_tag[corner]
    }

    /// Branch label carried by a vertex, if any.
    pub fn vertex_tag(&self, vertex: usize) -> Option<u32> {
        self.vertices[vertex]
            .corners
            .iter()
            .find_map(|&c| self.corner_tag[c])
    }

    pub fn vertex_marked(&self, vertex: usize) -> bool {
        self.vertices[vertex]
            .corners
            .iter()
            .any(|&c| self.marked_corner[c])
    }

    /// A vertex that cylinders may not cross: singular, labeled, or marked.
    pub fn vertex_distinguished(&self, vertex: usize) -> bool {
        self.vertices[vertex].order() != 0
            || self.vertex_tag(vertex).is_some()
            || self.vertex_marked(vertex)
    }

    /// Tag every corner of a vertex with a branch label.
    pub fn tag_vertex(&mut self, vertex: usize, label: u32) {
        for i in 0..self.vertices[vertex].corners.len() {
            let c = self.vertices[vertex].corners[i];
            self.corner_tag[c] = Some(label);
        }
    }

    pub fn mark_vertex(&mut self, vertex: usize) {
        for i in 0..self.vertices[vertex].corners.len() {
            let c = self.vertices[vertex].corners[i];
            self.marked_corner[c] = true;
        }
    }

    pub fn set_corner_tag(&mut self, corner: usize, tag: Option<u32>) {
        self.corner_tag[corner] = tag;
    }

    pub fn set_corner_mark(&mut self, corner: usize, mark: bool) {
        self.marked_corner[corner] = mark;
    }

    /// Euler characteristic route: `V - E + F` with `E = 2n`, `F = n`.
    pub fn genus(&self) -> i64 {
        let chi = self.vertices.len() as i64 - self.n as i64;
        debug_assert_eq!(chi % 2, 0);
        // cross-check against the angle route: sum of orders is 4g - 4
        let order_sum: i64 = self.vertices.iter().map(|v| v.order()).sum();
        let g = (2 - chi) / 2;
        debug_assert_eq!(order_sum, 4 * g - 4);
        g
    }

    /// Singularity table: vertices of nonzero order plus labeled or marked
    /// regular vertices, sorted ascending by order with vertex id as the tie
    /// break. Row index + 1 is the canonical label assignment.
    pub fn singularities(&self) -> SingularityTable {
        let mut entries: Vec<SingularityEntry> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(id, v)| {
                v.order() != 0 || self.vertex_tag(*id).is_some() || self.vertex_marked(*id)
            })
            .map(|(id, v)| SingularityEntry {
                vertex: id,
                angle_pi: v.angle_pi(),
                order: v.order(),
                label: self.vertex_tag(id),
            })
            .collect();
        entries.sort_by_key(|e| (e.order, e.vertex));
        SingularityTable {
            entries,
            genus: self.genus(),
        }
    }

    /// Right and up neighbor maps; meaningful when the surface has no flips.
    pub fn h_map(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.pairing[side(i, RIGHT)] / 4).collect()
    }

    pub fn v_map(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.pairing[side(i, TOP)] / 4).collect()
    }

    pub fn gluings(&self) -> Vec<Gluing> {
        self.couples()
            .into_iter()
            .map(|a| Gluing {
                a,
                b: self.pairing[a],
                flip: self.flip[a],
                weight: self.weight[a],
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityEntry {
    pub vertex: usize,
    pub angle_pi: i64,
    pub order: i64,
    pub label: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityTable {
    pub entries: Vec<SingularityEntry>,
    pub genus: i64,
}

impl SingularityTable {
    pub fn orders(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.order).collect()
    }
}

/// On-disk form. `pairings` entries are `[sideA, sideB, flip]` or
/// `[sideA, sideB, flip, weight]`; unknown fields are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub cells: usize,
    pub pairings: Vec<PairingRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverStamp>,
}

/// Build descriptor echoed into serialized covers so that verification can
/// reconstruct deck and branch data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverStamp {
    pub base: String,
    pub k: u64,
    pub a: Vec<i64>,
    pub m: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairingRow {
    Plain(usize, usize, bool),
    Weighted(usize, usize, bool, i64),
}

impl PairingRow {
    pub fn to_gluing(&self) -> Gluing {
        match *self {
            PairingRow::Plain(a, b, flip) => Gluing::new(a, b, flip),
            PairingRow::Weighted(a, b, flip, w) => Gluing {
                a,
                b,
                flip,
                weight: Some(w),
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed surface file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

impl SurfaceFile {
    pub fn from_surface(s: &CellComplexSurface) -> Self {
        SurfaceFile {
            cells: s.n_cells(),
            pairings: s
                .gluings()
                .into_iter()
                .map(|g| match g.weight {
                    Some(w) => PairingRow::Weighted(g.a, g.b, g.flip, w),
                    None => PairingRow::Plain(g.a, g.b, g.flip),
                })
                .collect(),
            names: None,
            cover: None,
        }
    }

    pub fn to_surface(&self) -> Result<CellComplexSurface, SurfaceError> {
        let gluings: Vec<Gluing> = self.pairings.iter().map(|r| r.to_gluing()).collect();
        CellComplexSurface::build(self.cells, &gluings)
    }
}

pub fn parse_surface_json(text: &str) -> Result<(CellComplexSurface, SurfaceFile), FileError> {
    let file: SurfaceFile = serde_json::from_str(text)?;
    let surface = file.to_surface()?;
    Ok((surface, file))
}

pub fn surface_to_json(s: &CellComplexSurface) -> String {
    serde_json::to_string_pretty(&SurfaceFile::from_surface(s)).expect("serializable")
}

/// The two-cell model of the four-pole genus-zero surface: a horizontal
/// cylinder of circumference two whose top and bottom seams are folded shut.
pub fn pillowcase() -> CellComplexSurface {
    CellComplexSurface::build(
        2,
        &[
            Gluing::new(side(0, RIGHT), side(1, LEFT), false),
            Gluing::new(side(1, RIGHT), side(0, LEFT), false),
            Gluing::new(side(0, TOP), side(1, TOP), true),
            Gluing::new(side(0, BOTTOM), side(1, BOTTOM), true),
        ],
    )
    .expect("pillowcase is valid")
}

/// Square torus from neighbor permutations: `i.right ~ h(i).left` and
/// `i.top ~ v(i).bottom`, all translations.
pub fn from_origami_maps(h: &[usize], v: &[usize]) -> Result<CellComplexSurface, SurfaceError> {
    let n = h.len();
    assert_eq!(n, v.len());
    let mut gluings = Vec::with_capacity(2 * n);
    for i in 0..n {
        gluings.push(Gluing::new(side(i, RIGHT), side(h[i], LEFT), false));
        gluings.push(Gluing::new(side(i, TOP), side(v[i], BOTTOM), false));
    }
    CellComplexSurface::build(n, &gluings)
}

pub fn unit_torus() -> CellComplexSurface {
    from_origami_maps(&[0], &[0]).expect("torus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_torus_is_regular() {
        let t = unit_torus();
        assert_eq!(t.vertices().len(), 1);
        assert_eq!(t.vertices()[0].order(), 0);
        assert_eq!(t.genus(), 1);
        assert!(t.singularities().entries.is_empty());
    }

    #[test]
    fn pillowcase_has_four_poles() {
        let p = pillowcase();
        assert_eq!(p.genus(), 0);
        let table = p.singularities();
        assert_eq!(table.orders(), vec![-1, -1, -1, -1]);
        assert_eq!(table.genus, 0);
    }

    #[test]
    fn axis_mismatch_rejected() {
        // horizontal side glued to a vertical side
        let r = CellComplexSurface::build(
            1,
            &[
                Gluing::new(side(0, RIGHT), side(0, TOP), false),
                Gluing::new(side(0, LEFT), side(0, BOTTOM), false),
            ],
        );
        assert!(matches!(r, Err(SurfaceError::AxisMismatch { .. })));
    }

    #[test]
    fn involution_violations_rejected() {
        let r = CellComplexSurface::build(
            1,
            &[
                Gluing::new(side(0, RIGHT), side(0, LEFT), false),
                Gluing::new(side(0, RIGHT), side(0, LEFT), false),
            ],
        );
        assert!(matches!(r, Err(SurfaceError::NotInvolution { .. })));

        let r = CellComplexSurface::build(1, &[Gluing::new(side(0, TOP), side(0, TOP), true)]);
        assert!(matches!(r, Err(SurfaceError::FixedSide { .. })));
    }

    #[test]
    fn disconnected_rejected() {
        let r = from_origami_maps(&[0, 1], &[0, 1]);
        assert!(matches!(r, Err(SurfaceError::Disconnected)));
    }

    #[test]
    fn four_cell_torus_row() {
        let h = vec![1, 2, 3, 0];
        let v = vec![0, 1, 2, 3];
        let t = from_origami_maps(&h, &v).unwrap();
        assert_eq!(t.genus(), 1);
        assert!(t.singularities().entries.is_empty());
    }

    #[test]
    fn three_square_l_shape_is_h2() {
        // h = (1 2 3), v = (1 2) in 1-based cycles
        let h = vec![1, 2, 0];
        let v = vec![1, 0, 2];
        let t = from_origami_maps(&h, &v).unwrap();
        assert_eq!(t.genus(), 2);
        // quadratic order 4 = abelian order 2, cone angle 6 pi
        assert_eq!(t.singularities().orders(), vec![4]);
        assert_eq!(t.singularities().entries[0].angle_pi, 6);
    }

    #[test]
    fn json_round_trip() {
        for s in [pillowcase(), unit_torus()] {
            let text = surface_to_json(&s);
            let (back, _) = parse_surface_json(&text).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn strict_parsing_rejects_unknown_fields() {
        let text = r#"{"cells": 1, "pairings": [[0,2,false],[1,3,false]], "extra": 1}"#;
        assert!(parse_surface_json(text).is_err());
    }

    #[test]
    fn marked_vertex_is_distinguished() {
        let mut t = unit_torus();
        assert!(!t.vertex_distinguished(0));
        t.mark_vertex(0);
        assert!(t.vertex_distinguished(0));
        let table = t.singularities();
        assert_eq!(table.orders(), vec![0]);
    }
}
