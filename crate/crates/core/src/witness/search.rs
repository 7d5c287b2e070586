//! Brute-force search for small witnesses.
//!
//! Clause (ii) is a condition on pairs of ζ-pairs, so an S-relation is a
//! clique in the graph whose vertices are same-sort pairs `(x, x')` and whose
//! edges join pairs on which no relation of S disagrees. Totality,
//! surjectivity and breaking `r` are all preserved by adding pairs, so it is
//! enough to enumerate maximal cliques.

use super::{all_elements, Construction, FiniteZeta, Witness};
use crate::rulebase::Status;
use crate::error::{Error, Result};
use crate::relation::{relation_between, Relation, RelationSet, Sort, Universe};
use crate::structures::{Elem, Structure};

const MAX_SEARCH_POINTS: usize = 4;

/// Candidate pairs on the `n`-point order and their pairwise disagreements.
pub struct SearchSpace {
    source: Structure,
    target: Structure,
    points: bool,
    vertices: Vec<(Elem, Elem)>,
    /// `disagree[v][w]`: canonical relations that differ between the two pairs.
    disagree: Vec<Vec<RelationSet>>,
    left_of: Vec<u128>,
    right_of: Vec<u128>,
}

fn differing(a: Relation, b: Relation) -> RelationSet {
    if a == b {
        return RelationSet::EMPTY;
    }
    [a, b].into_iter().filter(|r| r.is_canonical()).fold(RelationSet::EMPTY, |s, r| s.with(r))
}

fn check_bound(n: usize) -> Result<()> {
    if n > MAX_SEARCH_POINTS {
        return Err(Error::Domain(format!("witness search is limited to {MAX_SEARCH_POINTS} points")));
    }
    Ok(())
}

impl SearchSpace {
    pub fn new(n: usize, points: bool) -> Result<SearchSpace> {
        check_bound(n)?;
        let source = Structure::linear_order(n)?;
        let elems = all_elements(&source, points);
        let vertices: Vec<(Elem, Elem)> = elems
            .iter()
            .flat_map(|x| elems.iter().filter(move |y| x.sort() == y.sort()).map(move |y| (*x, *y)))
            .collect();
        assert!(vertices.len() <= 128);
        let disagree = vertices
            .iter()
            .map(|(x, x2)| {
                vertices
                    .iter()
                    .map(|(y, y2)| {
                        differing(relation_between(x, y), relation_between(x2, y2))
                            | differing(relation_between(y, x), relation_between(y2, x2))
                    })
                    .collect()
            })
            .collect();
        let mask = |f: &dyn Fn(&(Elem, Elem)) -> bool| {
            vertices.iter().enumerate().filter(|(_, v)| f(v)).fold(0u128, |m, (i, _)| m | 1 << i)
        };
        let left_of = elems.iter().map(|e| mask(&|v| v.0 == *e)).collect();
        let right_of = elems.iter().map(|e| mask(&|v| v.1 == *e)).collect();
        Ok(SearchSpace { target: source.primed(), source, points, vertices, disagree, left_of, right_of })
    }

    fn adjacency(&self, s: RelationSet) -> Vec<u128> {
        (0..self.vertices.len())
            .map(|v| {
                (0..self.vertices.len())
                    .filter(|&w| w != v && (self.disagree[v][w] & s).is_empty())
                    .fold(0u128, |m, w| m | 1 << w)
            })
            .collect()
    }

    fn covers(&self, set: u128) -> bool {
        self.left_of.iter().all(|m| m & set != 0) && self.right_of.iter().all(|m| m & set != 0)
    }

    pub fn disagreement(&self, clique: u128) -> RelationSet {
        let members: Vec<usize> = (0..self.vertices.len()).filter(|i| clique >> i & 1 == 1).collect();
        let mut out = RelationSet::EMPTY;
        for &v in &members {
            for &w in &members {
                out = out | self.disagree[v][w];
            }
        }
        out
    }

    /// Visit every maximal clique that is total and surjective, until `visit`
    /// returns false.
    pub fn for_each_maximal(&self, s: RelationSet, visit: &mut dyn FnMut(u128) -> bool) {
        let adj = self.adjacency(s);
        let usable = (0..self.vertices.len())
            .filter(|&v| (self.disagree[v][v] & s).is_empty())
            .fold(0u128, |m, v| m | 1 << v);
        self.bron_kerbosch(&adj, 0, usable, 0, visit);
    }

    fn bron_kerbosch(&self, adj: &[u128], r: u128, mut p: u128, mut x: u128, visit: &mut dyn FnMut(u128) -> bool) -> bool {
        if !self.covers(r | p) {
            return true;
        }
        if p == 0 {
            return x != 0 || visit(r);
        }
        let pivot = (p | x).trailing_zeros() as usize;
        let mut candidates = p & !adj[pivot];
        while candidates != 0 {
            let v = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            let bit = 1u128 << v;
            if !self.bron_kerbosch(adj, r | bit, p & adj[v], x & adj[v], visit) {
                return false;
            }
            p &= !bit;
            x |= bit;
        }
        true
    }

    pub fn zeta(&self, clique: u128) -> FiniteZeta {
        let pairs = (0..self.vertices.len()).filter(|i| clique >> i & 1 == 1).map(|i| self.vertices[i]).collect();
        FiniteZeta::new(self.source.clone(), self.target.clone(), pairs, self.points).expect("search pairs are well formed")
    }
}

fn mentions_points(s: RelationSet) -> bool {
    s.iter().any(|r| r.sorts() != (Sort::Interval, Sort::Interval))
}

/// A surjective S-relation between orders of at most `max_points` points
/// that breaks `r`, if one exists.
pub fn search_witness(s: RelationSet, r: Relation, max_points: usize) -> Result<Option<Witness>> {
    if !r.is_canonical() {
        return Err(Error::Domain(format!("{r} is not canonical")));
    }
    check_bound(max_points)?;
    let points = mentions_points(s.with(r));
    for n in 1..=max_points {
        let space = SearchSpace::new(n, points)?;
        let mut found = None;
        space.for_each_maximal(s, &mut |c| {
            if space.disagreement(c).contains(r) {
                found = Some(c);
                false
            } else {
                true
            }
        });
        if let Some(c) = found {
            return Ok(Some(Witness {
                id: format!("search-{n}"),
                universe: Universe::Rplus,
                row: "search".into(),
                respects: s,
                breaks: RelationSet::singleton(r),
                construction: Construction::Finite(space.zeta(c)),
                dual_of: None,
                status: Status::Sound,
            }));
        }
    }
    Ok(None)
}

/// Every relation some S-relation on at most `max_points` points breaks.
pub fn breakable(s: RelationSet, max_points: usize) -> Result<RelationSet> {
    check_bound(max_points)?;
    let mut out = RelationSet::EMPTY;
    let rest = RelationSet::FULL - s;
    for n in 1..=max_points {
        let space = SearchSpace::new(n, true)?;
        space.for_each_maximal(s, &mut |c| {
            out = out | space.disagreement(c);
            out != rest
        });
    }
    Ok(out)
}
