//! Translation structure on square-tiled surfaces.
//!
//! `to_origami` re-orients cells through the orientation double cover: the
//! double has cells `(cell, sheet)`, sheet 1 being the half-turned copy, and
//! every gluing becomes a translation. It is disconnected exactly when the
//! surface already carries a translation structure, and the component of
//! `(0, 0)` is then the origami presentation.
//!
//! The `SL(2,Z)` re-tilings act on origami presentations. Each generator
//! step keeps the cell set and carries a corner map back to the previous
//! tiling, so vertex labels and marks survive changes of direction.

use crate::perm::Perm;
use crate::surface::{from_origami_maps, side, CellComplexSurface, Gluing, SurfaceError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Right- and up-neighbor permutations of a square-tiled translation
/// surface.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Origami {
    pub h: Perm,
    pub v: Perm,
}

impl Origami {
    pub fn new(h: Perm, v: Perm) -> Self {
        assert_eq!(h.len(), v.len());
        Origami { h, v }
    }

    pub fn n_cells(&self) -> usize {
        self.h.len()
    }

    pub fn to_surface(&self) -> Result<CellComplexSurface, SurfaceError> {
        from_origami_maps(self.h.images(), self.v.images())
    }

    /// A corner whose commutator cycle has length `r` is a cone point of
    /// abelian order `r - 1`.
    pub fn commutator(&self) -> Perm {
        self.h
            .compose(&self.v)
            .compose(&self.h.inverse())
            .compose(&self.v.inverse())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HolonomyError {
    #[error("surface has nontrivial linear holonomy")]
    NontrivialHolonomy,
    #[error("orientation double cover is malformed")]
    Defect,
}

/// The orientation double cover: flip-free, cells `2*base + sheet`.
pub struct DoubleCover {
    pub surface: CellComplexSurface,
    /// Sheet exchange, a fixed-point-free cell involution.
    pub sigma: Vec<usize>,
    pub base_cell: Vec<usize>,
    pub base_corner: Vec<usize>,
    pub connected: bool,
}

pub fn orientation_double(s: &CellComplexSurface) -> DoubleCover {
    let n = s.n_cells();
    let mut gluings = Vec::with_capacity(4 * n);
    for a in s.couples() {
        let b = s.pairing(a);
        let (i, da) = (a / 4, a % 4);
        let (j, db) = (b / 4, b % 4);
        if s.is_flip(a) {
            gluings.push(Gluing::new(side(2 * i, da), side(2 * j + 1, (db + 2) % 4), false));
            gluings.push(Gluing::new(side(2 * i + 1, (da + 2) % 4), side(2 * j, db), false));
        } else {
            gluings.push(Gluing::new(side(2 * i, da), side(2 * j, db), false));
            gluings.push(Gluing::new(
                side(2 * i + 1, (da + 2) % 4),
                side(2 * j + 1, (db + 2) % 4),
                false,
            ));
        }
    }
    let mut surface =
        CellComplexSurface::build_components_allowed(2 * n, &gluings).expect("double is valid");
    let connected = cell_components(&surface) == 1;

    let mut base_corner = vec![0usize; 8 * n];
    for cell in 0..2 * n {
        let (i, sheet) = (cell / 2, cell % 2);
        for c in 0..4 {
            let bc = if sheet == 0 { 4 * i + c } else { 4 * i + (c + 2) % 4 };
            base_corner[4 * cell + c] = bc;
            surface.set_corner_tag(4 * cell + c, s.tag_of_corner(bc));
        }
    }
    // a distinguished point downstairs stays distinguished upstairs even
    // when its cone angle becomes 2 pi (poles lift to marked points)
    for vid in 0..surface.vertices().len() {
        let corner = surface.vertices()[vid].corners[0];
        let base_vertex = s.vertex_of_corner(base_corner[corner]);
        if s.vertex_distinguished(base_vertex) && !surface.vertex_distinguished(vid) {
            surface.mark_vertex(vid);
        }
        if s.vertex_marked(base_vertex) && !surface.vertex_marked(vid) {
            surface.mark_vertex(vid);
        }
    }
    let sigma = (0..2 * n)
        .map(|cell| if cell % 2 == 0 { cell + 1 } else { cell - 1 })
        .collect();
    DoubleCover {
        surface,
        sigma,
        base_cell: (0..2 * n).map(|c| c / 2).collect(),
        base_corner,
        connected,
    }
}

pub fn cell_components(s: &CellComplexSurface) -> usize {
    let n = s.n_cells();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = count;
        while let Some(i) = stack.pop() {
            for d in 0..4 {
                let j = s.pairing(side(i, d)) / 4;
                if comp[j] == usize::MAX {
                    comp[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    count
}

/// An origami presentation of a translation surface that may have been given
/// with half-turn gluings: per base cell, the chosen sheet of the double.
#[derive(Debug)]
pub struct OrigamiSurface {
    pub surface: CellComplexSurface,
    pub origami: Origami,
    /// Sheet used for each cell (true = half-turned copy).
    pub flipped: Vec<bool>,
}

/// Extract the translation structure. Fails exactly when the orientation
/// double cover is connected.
pub fn to_origami(s: &CellComplexSurface) -> Result<OrigamiSurface, HolonomyError> {
    let double = orientation_double(s);
    if double.connected {
        return Err(HolonomyError::NontrivialHolonomy);
    }
    let n = s.n_cells();
    // component of (cell 0, sheet 0)
    let mut sheet = vec![usize::MAX; n];
    let mut stack = vec![0usize];
    sheet[0] = 0;
    while let Some(cell) = stack.pop() {
        let dcell = 2 * cell + sheet[cell];
        for d in 0..4 {
            let p = double.surface.pairing(side(dcell, d));
            let (j, sj) = (p / 4 / 2, p / 4 % 2);
            if sheet[j] == usize::MAX {
                sheet[j] = sj;
                stack.push(j);
            } else if sheet[j] != sj {
                return Err(HolonomyError::Defect);
            }
        }
    }
    if sheet.iter().any(|&x| x == usize::MAX) {
        return Err(HolonomyError::Defect);
    }

    let mut gluings = Vec::with_capacity(2 * n);
    let mut seen = vec![false; 4 * n];
    for i in 0..n {
        for d in 0..4 {
            let a = side(2 * i + sheet[i], d);
            let b = double.surface.pairing(a);
            let (j, db) = (b / 4 / 2, b % 4);
            let my = side(i, d);
            let other = side(j, db);
            if seen[my] || seen[other] {
                continue;
            }
            seen[my] = true;
            seen[other] = true;
            gluings.push(Gluing::new(my, other, false));
        }
    }
    let mut surface = CellComplexSurface::build(n, &gluings).map_err(|_| HolonomyError::Defect)?;
    for i in 0..n {
        for c in 0..4 {
            let dc = 4 * (2 * i + sheet[i]) + c;
            surface.set_corner_tag(4 * i + c, double.surface.tag_of_corner(dc));
            surface.set_corner_mark(
                4 * i + c,
                double
                    .surface
                    .vertex_marked(double.surface.vertex_of_corner(dc)),
            );
        }
    }
    let h = Perm::from_images(surface.h_map()).ok_or(HolonomyError::Defect)?;
    let v = Perm::from_images(surface.v_map()).ok_or(HolonomyError::Defect)?;
    Ok(OrigamiSurface {
        surface,
        origami: Origami::new(h, v),
        flipped: sheet.iter().map(|&x| x == 1).collect(),
    })
}

/// One re-tiling step. `T` is the shear fixing the horizontal direction,
/// `R` the quarter rotation sending `(p, q)` to `(q, -p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    T,
    TInv,
    R,
}

impl Step {
    pub fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            Step::T => [[1, 1], [0, 1]],
            Step::TInv => [[1, -1], [0, 1]],
            Step::R => [[0, 1], [-1, 0]],
        }
    }

    pub fn apply_vec(self, (p, q): (i64, i64)) -> (i64, i64) {
        let m = self.matrix();
        (m[0][0] * p + m[0][1] * q, m[1][0] * p + m[1][1] * q)
    }
}

fn step_corner_source(
    step: Step,
    h: &Perm,
    hinv: &Perm,
    cell: usize,
    corner: usize,
) -> (usize, usize) {
    match step {
        Step::T => match corner {
            0 | 1 => (cell, corner),
            2 => (cell, 3),
            _ => (hinv.apply(cell), 3),
        },
        Step::TInv => match corner {
            0 | 1 => (cell, corner),
            3 => (cell, 2),
            _ => (h.apply(cell), 2),
        },
        Step::R => (cell, (corner + 1) % 4),
    }
}

/// Apply one step to a flip-free surface, transporting corner tags and
/// marks.
pub fn apply_step(s: &CellComplexSurface, step: Step) -> CellComplexSurface {
    let h = Perm::from_images(s.h_map()).expect("translation surface");
    let v = Perm::from_images(s.v_map()).expect("translation surface");
    let hinv = h.inverse();
    let (nh, nv): (Perm, Perm) = match step {
        Step::T => (h.clone(), v.compose(&hinv)),
        Step::TInv => (h.clone(), v.compose(&h)),
        Step::R => (v.clone(), hinv.clone()),
    };
    let mut out = from_origami_maps(nh.images(), nv.images()).expect("re-tiling is valid");
    let n = s.n_cells();
    for i in 0..n {
        for c in 0..4 {
            let (oi, oc) = step_corner_source(step, &h, &hinv, i, c);
            let old_corner = 4 * oi + oc;
            out.set_corner_tag(4 * i + c, s.tag_of_corner(old_corner));
            out.set_corner_mark(4 * i + c, s.vertex_marked(s.vertex_of_corner(old_corner)));
        }
    }
    debug_assert!(transport_is_class_bijection(s, &out, step));
    out
}

fn transport_is_class_bijection(
    old: &CellComplexSurface,
    new: &CellComplexSurface,
    step: Step,
) -> bool {
    let h = Perm::from_images(old.h_map()).unwrap();
    let hinv = h.inverse();
    let n = old.n_cells();
    let mut class_map = vec![usize::MAX; new.vertices().len()];
    for i in 0..n {
        for c in 0..4 {
            let (oi, oc) = step_corner_source(step, &h, &hinv, i, c);
            let nv = new.vertex_of_corner(4 * i + c);
            let ov = old.vertex_of_corner(4 * oi + oc);
            if class_map[nv] == usize::MAX {
                class_map[nv] = ov;
            } else if class_map[nv] != ov {
                return false;
            }
        }
    }
    let mut hit = vec![false; old.vertices().len()];
    for &ov in class_map.iter() {
        if ov == usize::MAX || hit[ov] {
            return false;
        }
        hit[ov] = true;
    }
    class_map.iter().enumerate().all(|(nv, &ov)| {
        new.vertices()[nv].angle_pi() == old.vertices()[ov].angle_pi()
    }) && hit.iter().all(|&x| x)
}

pub fn apply_word(s: &CellComplexSurface, word: &[Step]) -> CellComplexSurface {
    word.iter().fold(s.clone(), |acc, &st| apply_step(&acc, st))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DirectionError {
    #[error("direction ({0}, {1}) is not primitive")]
    NotCoprime(i64, i64),
}

fn round_div(a: i64, b: i64) -> i64 {
    num_integer::Integer::div_floor(&(2 * a + b), &(2 * b))
}

/// Word of steps whose matrix sends the primitive vector `(p, q)` to
/// `(1, 0)`.
pub fn horizontalizing_word(p: i64, q: i64) -> Result<Vec<Step>, DirectionError> {
    if (p, q) == (0, 0) || num_integer::gcd(p, q).abs() != 1 {
        return Err(DirectionError::NotCoprime(p, q));
    }
    let (mut p, mut q) = (p, q);
    let mut word = Vec::new();
    while q != 0 {
        // shear until |p| is at most |q|/2, then rotate
        let t = round_div(-p, q);
        for _ in 0..t.abs() {
            word.push(if t > 0 { Step::T } else { Step::TInv });
        }
        p += t * q;
        word.push(Step::R);
        let (np, nq) = (q, -p);
        p = np;
        q = nq;
    }
    if p == -1 {
        word.push(Step::R);
        word.push(Step::R);
        p = 1;
    }
    debug_assert_eq!(p, 1);
    Ok(word)
}

/// The spec-facing generator action on `(h, v)` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Gen {
    /// Horizontal shear: `(h, v) -> (h, v h^-1)`.
    T,
    /// Quarter turn: `(h, v) -> (v, h^-1)`.
    S,
}

pub fn sl2z_action(o: &Origami, g: Sl2Gen) -> Origami {
    match g {
        Sl2Gen::T => Origami::new(o.h.clone(), o.v.compose(&o.h.inverse())),
        Sl2Gen::S => Origami::new(o.v.clone(), o.h.inverse()),
    }
}

/// Lexicographically least relabeling of `(h, v)` over breadth-first
/// searches from every start cell. Two transitive origamis are related by a
/// cell relabeling exactly when their canonical forms agree.
pub fn canonical_origami(o: &Origami) -> Origami {
    let n = o.n_cells();
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for root in 0..n {
        let mut new_of_old = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        new_of_old[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let cell = order[head];
            head += 1;
            for img in [o.h.apply(cell), o.v.apply(cell)] {
                if new_of_old[img] == usize::MAX {
                    new_of_old[img] = order.len();
                    order.push(img);
                }
            }
        }
        if order.len() < n {
            return o.clone();
        }
        let mut nh = vec![0; n];
        let mut nv = vec![0; n];
        for old in 0..n {
            nh[new_of_old[old]] = new_of_old[o.h.apply(old)];
            nv[new_of_old[old]] = new_of_old[o.v.apply(old)];
        }
        let cand = (nh, nv);
        if best.as_ref().map_or(true, |b| cand < *b) {
            best = Some(cand);
        }
    }
    let (h, v) = best.unwrap();
    Origami::new(Perm::from_images(h).unwrap(), Perm::from_images(v).unwrap())
}

pub struct OrbitResult {
    pub elements: Vec<Origami>,
    pub truncated: bool,
}

/// Breadth-first closure under the re-tiling generators, on canonical forms.
pub fn sl2z_orbit(o: &Origami, max_size: usize) -> OrbitResult {
    let start = canonical_origami(o);
    let mut seen = std::collections::BTreeSet::new();
    seen.insert((start.h.clone(), start.v.clone()));
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(start);
    let mut elements = Vec::new();
    let mut truncated = false;
    while let Some(cur) = queue.pop_front() {
        elements.push(cur.clone());
        let hinv = cur.h.inverse();
        let vinv = cur.v.inverse();
        let neighbors = [
            Origami::new(cur.h.clone(), cur.v.compose(&hinv)),
            Origami::new(cur.h.clone(), cur.v.compose(&cur.h)),
            Origami::new(cur.v.clone(), hinv.clone()),
            Origami::new(vinv.clone(), cur.h.clone()),
        ];
        for nb in neighbors {
            let canon = canonical_origami(&nb);
            let key = (canon.h.clone(), canon.v.clone());
            if !seen.contains(&key) {
                if seen.len() >= max_size {
                    truncated = true;
                    continue;
                }
                seen.insert(key);
                queue.push_back(canon);
            }
        }
    }
    elements.sort_by(|a, b| (&a.h, &a.v).cmp(&(&b.h, &b.v)));
    OrbitResult {
        elements,
        truncated,
    }
}

/// Invariants pinning down the generator conventions: stratum, genus, and
/// commutator conjugacy class are preserved.
pub fn action_preserves_invariants(o: &Origami, g: Sl2Gen) -> bool {
    let before = o.to_surface().map(|s| s.singularities());
    let img = sl2z_action(o, g);
    let after = img.to_surface().map(|s| s.singularities());
    match (before, after) {
        (Ok(b), Ok(a)) => {
            let mut bo = b.orders();
            let mut ao = a.orders();
            bo.sort_unstable();
            ao.sort_unstable();
            bo == ao
                && b.genus == a.genus
                && o.commutator().cycle_type() == img.commutator().cycle_type()
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{pillowcase, unit_torus};

    #[test]
    fn torus_origami_is_trivial() {
        let t = unit_torus();
        let o = to_origami(&t).unwrap();
        assert_eq!(o.origami.h, Perm::identity(1));
        assert_eq!(o.origami.v, Perm::identity(1));
    }

    #[test]
    fn pillowcase_has_no_translation_structure() {
        assert_eq!(
            to_origami(&pillowcase()).unwrap_err(),
            HolonomyError::NontrivialHolonomy
        );
    }

    #[test]
    fn double_of_pillowcase_is_marked_torus() {
        let d = orientation_double(&pillowcase());
        assert!(d.connected);
        assert_eq!(d.surface.n_cells(), 4);
        assert_eq!(d.surface.genus(), 1);
        // the four poles lift to marked regular points
        let marked = (0..d.surface.vertices().len())
            .filter(|&v| d.surface.vertex_marked(v))
            .count();
        assert_eq!(marked, 4);
    }

    #[test]
    fn t_action_formula() {
        // h = (1 2), v = id: T gives v = h^-1
        let o = Origami::new(
            Perm::from_cycles(2, &[&[0, 1]]).unwrap(),
            Perm::identity(2),
        );
        let t = sl2z_action(&o, Sl2Gen::T);
        assert_eq!(t.h, o.h);
        assert_eq!(t.v, o.h.inverse());
    }

    #[test]
    fn s_four_times_is_conjugate() {
        let o = Origami::new(
            Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap(),
            Perm::from_cycles(3, &[&[0, 1]]).unwrap(),
        );
        let mut cur = o.clone();
        for _ in 0..4 {
            cur = sl2z_action(&cur, Sl2Gen::S);
        }
        assert_eq!(canonical_origami(&cur), canonical_origami(&o));
    }

    #[test]
    fn generator_actions_preserve_invariants() {
        let o = Origami::new(
            Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap(),
            Perm::from_cycles(3, &[&[0, 1]]).unwrap(),
        );
        assert!(action_preserves_invariants(&o, Sl2Gen::T));
        assert!(action_preserves_invariants(&o, Sl2Gen::S));
    }

    #[test]
    fn torus_orbit_is_one_point() {
        let o = Origami::new(Perm::identity(1), Perm::identity(1));
        let orbit = sl2z_orbit(&o, 16);
        assert_eq!(orbit.elements.len(), 1);
        assert!(!orbit.truncated);
    }

    #[test]
    fn h2_three_square_orbit() {
        let o = Origami::new(
            Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap(),
            Perm::from_cycles(3, &[&[0, 1]]).unwrap(),
        );
        let orbit = sl2z_orbit(&o, 64);
        assert!(!orbit.truncated);
        // independent enumeration: all transitive 3-cell origamis whose
        // commutator is a 3-cycle, up to relabeling
        let mut all = std::collections::BTreeSet::new();
        let perms: Vec<Perm> = all_perms(3);
        for h in &perms {
            for v in &perms {
                if !crate::perm::is_transitive(&[h, v]) {
                    continue;
                }
                let cand = Origami::new(h.clone(), v.clone());
                if cand.commutator().cycle_type() != vec![3] {
                    continue;
                }
                let c = canonical_origami(&cand);
                all.insert((c.h, c.v));
            }
        }
        assert_eq!(all.len(), 3);
        assert_eq!(orbit.elements.len(), 3);
        for e in &orbit.elements {
            assert!(all.contains(&(e.h.clone(), e.v.clone())));
        }
    }

    fn all_perms(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut images: Vec<usize> = (0..n).collect();
        permute(&mut images, 0, &mut out);
        out
    }

    fn permute(images: &mut Vec<usize>, at: usize, out: &mut Vec<Perm>) {
        if at == images.len() {
            out.push(Perm::from_images(images.clone()).unwrap());
            return;
        }
        for i in at..images.len() {
            images.swap(at, i);
            permute(images, at + 1, out);
            images.swap(at, i);
        }
    }

    #[test]
    fn horizontalizing_words_map_to_unit() {
        for p in -6i64..=6 {
            for q in -6i64..=6 {
                if (p, q) == (0, 0) || num_integer::gcd(p, q).abs() != 1 {
                    continue;
                }
                let word = horizontalizing_word(p, q).unwrap();
                let end = word.iter().fold((p, q), |acc, st| st.apply_vec(acc));
                assert_eq!(end, (1, 0), "direction ({p},{q})");
            }
        }
        assert!(horizontalizing_word(2, 4).is_err());
    }

    #[test]
    fn steps_preserve_singularities() {
        let o = Origami::new(
            Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap(),
            Perm::from_cycles(3, &[&[0, 1]]).unwrap(),
        );
        let s = o.to_surface().unwrap();
        for step in [Step::T, Step::TInv, Step::R] {
            let t = apply_step(&s, step);
            let mut a = s.singularities().orders();
            let mut b = t.singularities().orders();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
            assert_eq!(s.genus(), t.genus());
        }
    }
}
