use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshPattern {
    Uniform,
    /// Widths `2h, h, 2h, h, ...` (`h_{2j-1} = 2 h_{2j}` in 1-based numbering).
    TwoOneAlternating,
    /// Built from an explicit edge list.
    Explicit,
}

/// Periodic partition of `[x_left, x_right]` into `N` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    edges: Vec<f64>,
    widths: Vec<f64>,
    pattern: MeshPattern,
}

impl Mesh1D {
    pub fn build(domain: (f64, f64), n: usize, pattern: MeshPattern) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidConfig(format!("bad domain ({a}, {b})")));
        }
        if n < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 cells, got {n}")));
        }
        let len = b - a;
        let widths: Vec<f64> = match pattern {
            MeshPattern::Uniform => vec![len / n as f64; n],
            MeshPattern::TwoOneAlternating => {
                if n % 2 == 1 {
                    return Err(Error::InvalidConfig(format!(
                        "two_one_alternating mesh needs an even cell count, got {n}"
                    )));
                }
                let h = 2.0 * len / (3.0 * n as f64);
                (0..n).map(|j| if j % 2 == 0 { 2.0 * h } else { h }).collect()
            }
            MeshPattern::Explicit => {
                return Err(Error::InvalidConfig(
                    "explicit meshes are built with Mesh1D::from_edges".into(),
                ))
            }
        };
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(a);
        let mut x = a;
        for w in &widths[..n - 1] {
            x += w;
            edges.push(x);
        }
        edges.push(b);
        let widths = edges.windows(2).map(|e| e[1] - e[0]).collect();
        Ok(Mesh1D {
            edges,
            widths,
            pattern,
        })
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::InvalidConfig("need at least 2 cells".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|e| e[1] <= e[0]) {
            return Err(Error::InvalidConfig("edges must be finite and strictly increasing".into()));
        }
        let widths = edges.windows(2).map(|e| e[1] - e[0]).collect();
        Ok(Mesh1D {
            edges,
            widths,
            pattern: MeshPattern::Explicit,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn width(&self, j: usize) -> f64 {
        self.widths[j]
    }

    pub fn pattern(&self) -> MeshPattern {
        self.pattern
    }

    pub fn left(&self) -> f64 {
        self.edges[0]
    }

    pub fn right(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.right() - self.left()
    }

    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.edges[j] + self.edges[j + 1])
    }

    pub fn h_min(&self) -> f64 {
        self.widths.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.widths.iter().cloned().fold(0.0, f64::max)
    }

    /// Physical point of reference coordinate `xi` in cell `j`.
    pub fn map_to_cell(&self, j: usize, xi: f64) -> f64 {
        self.center(j) + 0.5 * self.widths[j] * xi
    }

    /// Wraps `x` into `[x_left, x_right)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let y = (x - self.left()).rem_euclid(l);
        self.left() + y
    }

    /// Cell containing `x` (after periodic wrap) and the reference coordinate in it.
    /// Points on an edge belong to the cell on their right.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let x = self.wrap(x);
        let j = match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(self.n_cells() - 1),
            Err(i) => i.saturating_sub(1).min(self.n_cells() - 1),
        };
        let xi = 2.0 * (x - self.center(j)) / self.widths[j];
        (j, xi.clamp(-1.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_widths() {
        let m = Mesh1D::build((0.0, 2.0 * PI), 4, MeshPattern::Uniform).unwrap();
        for &h in m.widths() {
            assert!((h - PI / 2.0).abs() < 1e-15);
        }
        assert_eq!(m.edges()[4], 2.0 * PI);
    }

    #[test]
    fn two_one_ratio() {
        let m = Mesh1D::build((0.0, 3.0), 2, MeshPattern::TwoOneAlternating).unwrap();
        assert!((m.width(0) - 2.0).abs() < 1e-15 && (m.width(1) - 1.0).abs() < 1e-15);
        let m = Mesh1D::build((0.0, 2.0 * PI), 160, MeshPattern::TwoOneAlternating).unwrap();
        for j in (0..160).step_by(2) {
            assert!((m.width(j) - 2.0 * m.width(j + 1)).abs() < 1e-13);
        }
        assert!((m.length() - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn odd_two_one_is_rejected() {
        assert!(Mesh1D::build((0.0, 1.0), 5, MeshPattern::TwoOneAlternating).is_err());
        assert!(Mesh1D::build((0.0, 1.0), 1, MeshPattern::Uniform).is_err());
    }

    #[test]
    fn locate_wraps() {
        let m = Mesh1D::build((0.0, 1.0), 4, MeshPattern::Uniform).unwrap();
        assert_eq!(m.locate(0.3).0, 1);
        assert_eq!(m.locate(1.3).0, 1);
        assert_eq!(m.locate(-0.1).0, 3);
        assert_eq!(m.locate(0.25).0, 1);
    }
}
