//! Betti numbers from integer Smith normal forms of simplicial boundary
//! matrices built directly from the cell list.

use std::collections::{BTreeMap, BTreeSet};

use distfe::SimplicialComplex;

/// All faces of the cells, grouped by dimension, each sorted.
pub fn closure(mesh: &SimplicialComplex) -> Vec<Vec<Vec<usize>>> {
    let n = mesh.dim();
    let mut faces: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); n + 1];
    for c in 0..mesh.num(n) {
        let mut cell = mesh.simplex(n, c).to_vec();
        cell.sort_unstable();
        for mask in 1u32..(1 << (n + 1)) {
            let face: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).map(|i| cell[i]).collect();
            faces[face.len() - 1].insert(face);
        }
    }
    faces.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn boundary(faces: &[Vec<usize>], cofaces: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let index: BTreeMap<&Vec<usize>, usize> = faces.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut m = vec![vec![0i64; cofaces.len()]; faces.len()];
    for (j, s) in cofaces.iter().enumerate() {
        for drop in 0..s.len() {
            let mut f = s.clone();
            f.remove(drop);
            m[index[&f]][j] = if drop % 2 == 0 { 1 } else { -1 };
        }
    }
    m
}

/// Nonzero diagonal of an integer diagonalization by unimodular row and
/// column operations. Its length is the rank.
pub fn smith_diagonal(mut m: Vec<Vec<i64>>) -> Vec<i64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pr, pc)) = (t..rows)
            .flat_map(|r| (t..cols).map(move |c| (r, c)))
            .filter(|&(r, c)| m[r][c] != 0)
            .min_by_key(|&(r, c)| m[r][c].abs())
        else {
            break;
        };
        m.swap(t, pr);
        for row in m.iter_mut() {
            row.swap(t, pc);
        }
        loop {
            let p = m[t][t];
            let mut clean = true;
            for r in t + 1..rows {
                let f = m[r][t] / p;
                if f != 0 {
                    for c in t..cols {
                        m[r][c] -= f * m[t][c];
                    }
                }
                if m[r][t] != 0 {
                    clean = false;
                }
            }
            for c in t + 1..cols {
                let f = m[t][c] / p;
                if f != 0 {
                    for row in m.iter_mut().skip(t) {
                        row[c] -= f * row[t];
                    }
                }
                if m[t][c] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
            let (r, c) = (t..rows)
                .map(|r| (r, t))
                .chain((t..cols).map(|c| (t, c)))
                .filter(|&(r, c)| m[r][c] != 0)
                .min_by_key(|&(r, c)| m[r][c].abs())
                .expect("pivot row or column is nonzero");
            m.swap(t, r);
            for row in m.iter_mut() {
                row.swap(t, c);
            }
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    out
}

/// Standard simplicial Betti numbers `b_0, …, b_n`.
pub fn betti(mesh: &SimplicialComplex) -> Vec<usize> {
    let faces = closure(mesh);
    let n = mesh.dim();
    let ranks: Vec<usize> = (0..=n + 1)
        .map(|k| if k == 0 || k > n { 0 } else { smith_diagonal(boundary(&faces[k - 1], &faces[k])).len() })
        .collect();
    (0..=n).map(|k| faces[k].len() - ranks[k] - ranks[k + 1]).collect()
}

/// Interior simplex counts per dimension: a facet is interior when two cells
/// share it, a lower simplex when it lies in no boundary facet.
pub fn interior_counts(mesh: &SimplicialComplex) -> Vec<usize> {
    let faces = closure(mesh);
    let n = mesh.dim();
    let mut shared: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for cell in &faces[n] {
        for drop in 0..cell.len() {
            let mut f = cell.clone();
            f.remove(drop);
            *shared.entry(f).or_default() += 1;
        }
    }
    let boundary: Vec<&Vec<usize>> = shared.iter().filter(|(_, &c)| c == 1).map(|(f, _)| f).collect();
    (0..=n)
        .map(|k| {
            if k == n {
                faces[n].len()
            } else {
                faces[k].iter().filter(|s| !boundary.iter().any(|b| s.iter().all(|v| b.contains(v)))).count()
            }
        })
        .collect()
}
