//! Marching-squares contour extraction on a rectilinear grid.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Grid edge carrying a contour point. `H(i, j)` joins nodes (i, j) and
/// (i + 1, j); `V(i, j)` joins (i, j) and (i, j + 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Contour polylines of `values` at `level`.
///
/// `values` is row-major with the x index outer: `values[i * ys.len() + j]`
/// is the value at `(xs[i], ys[j])`. Saddle cells are resolved with the cell
/// centre average. Open lines come first, ordered by their starting edge,
/// then closed loops (whose first point is repeated at the end).
pub fn contour<T: Scalar>(xs: &[T], ys: &[T], values: &[T], level: T) -> Vec<Vec<(T, T)>> {
    let (nx, ny) = (xs.len(), ys.len());
    assert_eq!(values.len(), nx * ny, "grid size mismatch");
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let at = |i: usize, j: usize| values[i * ny + j];
    let above = |i: usize, j: usize| at(i, j) >= level;

    let point = |edge: Edge| -> (T, T) {
        let ((i0, j0), (i1, j1)) = match edge {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (at(i0, j0), at(i1, j1));
        let t = (level - a) / (b - a);
        (xs[i0] + t * (xs[i1] - xs[i0]), ys[j0] + t * (ys[j1] - ys[j0]))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            // corners counter-clockwise from (i, j)
            let corners = [above(i, j), above(i + 1, j), above(i + 1, j + 1), above(i, j + 1)];
            let crossed: Vec<Edge> = [(bottom, 0, 1), (right, 1, 2), (top, 2, 3), (left, 3, 0)]
                .into_iter()
                .filter(|&(_, a, b)| corners[a] != corners[b])
                .map(|(e, _, _)| e)
                .collect();
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let centre = (at(i, j) + at(i + 1, j) + at(i + 1, j + 1) + at(i, j + 1)) / T::lit(4.0);
                    let centre_above = centre >= level;
                    // cut off the two corners on the other side of the centre
                    let cuts = [(left, bottom), (bottom, right), (right, top), (top, left)];
                    for (k, cut) in cuts.into_iter().enumerate() {
                        if corners[k] != centre_above {
                            segments.push(cut);
                        }
                    }
                }
                _ => {}
            }
        }
    }

    let mut by_edge: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(k);
        by_edge.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    let walk = |start: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut chain = vec![start];
        let mut current = start;
        while let Some(&k) = by_edge[&current].iter().find(|&&k| !used[k]) {
            used[k] = true;
            let (a, b) = segments[k];
            current = if a == current { b } else { a };
            chain.push(current);
        }
        chain
    };

    let open_starts: Vec<Edge> = by_edge.iter().filter(|(_, s)| s.len() == 1).map(|(&e, _)| e).collect();
    for start in open_starts {
        if by_edge[&start].iter().all(|&k| used[k]) {
            continue;
        }
        lines.push(walk(start, &mut used));
    }
    for k in 0..segments.len() {
        if !used[k] {
            lines.push(walk(segments[k].0, &mut used));
        }
    }
    lines.into_iter().map(|chain| chain.into_iter().map(point).collect()).collect()
}

/// y values where the polylines cross the vertical line `x = x0`.
pub fn crossings_at_x<T: Scalar>(lines: &[Vec<(T, T)>], x0: T) -> Vec<T> {
    let mut ys = Vec::new();
    for line in lines {
        for w in line.windows(2) {
            let ((xa, ya), (xb, yb)) = (w[0], w[1]);
            let (da, db) = (xa - x0, xb - x0);
            if da == T::zero() {
                ys.push(ya);
            } else if db == T::zero() {
                ys.push(yb);
            } else if (da < T::zero()) != (db < T::zero()) {
                ys.push(ya + (yb - ya) * (-da) / (db - da));
            }
        }
        if line.len() == 1 && line[0].0 == x0 {
            ys.push(line[0].1);
        }
    }
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite contour"));
    ys.dedup();
    ys
}
