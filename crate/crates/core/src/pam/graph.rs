//! Interval reachability graph and structural classification.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use super::interval::IntervalSet;
use super::map::Pam;

/// Edge `(k, j)` iff the image of piece `k` meets the domain of piece `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    pub vertices: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl ReachGraph {
    pub fn of(f: &Pam) -> ReachGraph {
        let mut edges = BTreeSet::new();
        for k in 0..f.len() {
            let img = f.image_of_piece(k);
            for (j, p) in f.pieces().iter().enumerate() {
                if img.meets(&p.domain) {
                    edges.insert((k, j));
                }
            }
        }
        ReachGraph { vertices: f.len(), edges }
    }

    pub fn successors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((k, 0)..(k + 1, 0)).map(|&(_, j)| j)
    }

    pub fn out_degree(&self, k: usize) -> usize {
        self.successors(k).count()
    }

    /// No cycle of length two or more.
    pub fn only_self_loops(&self) -> bool {
        // Kahn's algorithm on the graph with self-loops removed.
        let mut indeg = vec![0usize; self.vertices];
        for &(k, j) in &self.edges {
            if k != j {
                indeg[j] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..self.vertices).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for j in self.successors(v) {
                if j != v {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        stack.push(j);
                    }
                }
            }
        }
        seen == self.vertices
    }

    pub fn is_functional(&self) -> bool {
        (0..self.vertices).all(|k| self.out_degree(k) == 1)
    }
}

impl fmt::Display for ReachGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges.iter().map(|(k, j)| format!("{}->{}", k + 1, j + 1)).collect();
        write!(f, "{}", edges.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    EasyDag,
    EasyFunctional,
    NegativeSlope,
    Bijection,
    SideGap,
    MiddleGap,
    Unsupported,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::EasyDag => "easy-dag",
            Shape::EasyFunctional => "easy-functional",
            Shape::NegativeSlope => "negative-slope",
            Shape::Bijection => "bijection",
            Shape::SideGap => "side-gap",
            Shape::MiddleGap => "middle-gap",
            Shape::Unsupported => "unsupported",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub piece_count: usize,
    pub injective: bool,
    /// `-1`, `0` or `1` per piece.
    pub slope_signs: Vec<i8>,
    pub surjective: bool,
    /// Image of the second piece lies entirely below the image of the first.
    pub twist: bool,
    pub graph: ReachGraph,
    pub shape: Shape,
}

pub fn classify(f: &Pam) -> Classification {
    let n = f.len();
    let images: Vec<_> = (0..n).map(|k| f.image_of_piece(k)).collect();
    let slope_signs: Vec<i8> = f
        .slopes()
        .map(|a| if a.is_zero() { 0 } else if a.is_positive() { 1 } else { -1 })
        .collect();
    let disjoint = (0..n).all(|i| (i + 1..n).all(|j| !images[i].meets(&images[j])));
    let injective = disjoint && slope_signs.iter().all(|&s| s != 0);
    let union = IntervalSet::from_intervals(images.iter().cloned());
    let surjective = union.parts() == [f.carrier().clone()];
    let twist = n == 2 && images[1].precedes(&images[0]);
    let graph = ReachGraph::of(f);

    let twisted_positive = injective && n == 2 && twist && slope_signs == [1, 1];
    let shape = if twisted_positive {
        if surjective {
            Shape::Bijection
        } else if images[1].lo > f.carrier().lo || images[0].hi < f.carrier().hi {
            Shape::SideGap
        } else {
            Shape::MiddleGap
        }
    } else if graph.only_self_loops() {
        Shape::EasyDag
    } else if graph.is_functional() {
        Shape::EasyFunctional
    } else if !(injective && n == 2) {
        Shape::Unsupported
    } else if slope_signs.contains(&-1) {
        Shape::NegativeSlope
    } else {
        // Positive, injective and untwisted maps have no 2-cycle in the graph.
        Shape::Unsupported
    };
    Classification { piece_count: n, injective, slope_signs, surjective, twist, graph, shape }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};
    use crate::pam::map::AffineMap;

    fn intro() -> Pam {
        Pam::two_piece(rat(1, 2), (rat(2, 3), rat(2, 3)), (rat(4, 3), rat(-2, 3))).unwrap()
    }

    #[test]
    fn intro_graph_and_shape() {
        let g = ReachGraph::of(&intro());
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (1, 0), (1, 1)]));
        let c = classify(&intro());
        assert_eq!(c.shape, Shape::Bijection);
        assert!(c.twist && c.injective && c.surjective);
    }

    #[test]
    fn other_shapes() {
        let expanding = Pam::two_piece(rat(1, 2), (rat(4, 3), int(0)), (rat(4, 3), rat(-1, 3))).unwrap();
        let c = classify(&expanding);
        assert!(!c.injective);
        assert_eq!(c.shape, Shape::Unsupported);

        let gap = Pam::two_piece(rat(1, 2), (rat(1, 2), rat(3, 4)), (rat(1, 2), rat(-1, 4))).unwrap();
        assert_eq!(classify(&gap).shape, Shape::MiddleGap);

        let id = Pam::from_cuts(&[int(0), int(1)], &[(int(1), int(0))]).unwrap();
        assert_eq!(ReachGraph::of(&id).edges, BTreeSet::from([(0, 0)]));
        assert_eq!(classify(&id).shape, Shape::EasyDag);

        let swap = Pam::two_piece(rat(1, 2), (rat(1, 4), rat(1, 2)), (rat(1, 4), int(0))).unwrap();
        assert!(ReachGraph::of(&swap).is_functional());
        assert_eq!(classify(&swap).shape, Shape::SideGap);
        assert_eq!(swap.piece(1).map, AffineMap::new(rat(1, 4), int(0)));
    }
}
