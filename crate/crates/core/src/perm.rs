//! Permutations in one-line notation, shared by the origami and
//! representation-search code.

use serde::{Deserialize, Serialize};

/// A permutation of `{0, .., n-1}` stored as its image vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Build from an image vector; `None` if it is not a bijection.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &j in &images {
            if j >= n || seen[j] {
                return None;
            }
            seen[j] = true;
        }
        Some(Perm(images))
    }

    /// Build from disjoint cycles over `{0, .., n-1}`; points not mentioned
    /// are fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Option<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (idx, &p) in cycle.iter().enumerate() {
                if p >= n || touched[p] {
                    return None;
                }
                touched[p] = true;
                images[p] = cycle[(idx + 1) % cycle.len()];
            }
        }
        Perm::from_images(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.0[point]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            images[j] = i;
        }
        Perm(images)
    }

    /// `(self * other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    /// `g * self * g^-1`.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        g.compose(self).compose(&g.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut p = self.0[start];
            while p != start {
                seen[p] = true;
                cycle.push(p);
                p = self.0[p];
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// Cycle lengths sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().into_iter().map(|c| c.len()).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// One-line display, cycles of length > 1 only, 1-based points.
    pub fn cycle_string(&self) -> String {
        let mut out = String::new();
        for cycle in self.cycles() {
            if cycle.len() < 2 {
                continue;
            }
            out.push('(');
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&(p + 1).to_string());
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("id");
        }
        out
    }
}

/// Orbit of `start` under a set of permutations.
pub fn orbit(gens: &[&Perm], start: usize) -> Vec<usize> {
    let mut seen = vec![false; gens.first().map_or(0, |g| g.len())];
    let mut stack = vec![start];
    let mut out = Vec::new();
    seen[start] = true;
    while let Some(p) = stack.pop() {
        out.push(p);
        for g in gens {
            let q = g.apply(p);
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn is_transitive(gens: &[&Perm]) -> bool {
    let n = gens.first().map_or(0, |g| g.len());
    n == 0 || orbit(gens, 0).len() == n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_then_left() {
        let a = Perm::from_cycles(3, &[&[0, 1]]).unwrap();
        let b = Perm::from_cycles(3, &[&[1, 2]]).unwrap();
        // (a*b)(1) = a(b(1)) = a(2) = 2
        assert_eq!(a.compose(&b).apply(1), 2);
    }

    #[test]
    fn inverse_round_trip() {
        let p = Perm::from_images(vec![2, 0, 1, 4, 3]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
    }

    #[test]
    fn cycle_type_sorted() {
        let p = Perm::from_cycles(8, &[&[0, 1, 2, 3], &[4, 5], &[6, 7]]).unwrap();
        assert_eq!(p.cycle_type(), vec![4, 2, 2]);
    }

    #[test]
    fn transitivity() {
        let h = Perm::from_cycles(4, &[&[0, 1]]).unwrap();
        let v = Perm::from_cycles(4, &[&[2, 3]]).unwrap();
        assert!(!is_transitive(&[&h, &v]));
        let w = Perm::from_cycles(4, &[&[1, 2]]).unwrap();
        assert!(is_transitive(&[&h, &w, &v]));
    }
}
