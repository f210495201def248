//! Global-nearest-neighbor association via the Hungarian method.

use serde::{Deserialize, Serialize};

/// One-to-one pairing of track rows with detection columns.
///
/// Indices refer to positions in the slices handed to [`associate`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_tracks: Vec<usize>,
    pub unassigned_detections: Vec<usize>,
}

/// Minimum-cost assignment of a rectangular matrix of finite costs. Returns
/// `min(rows, cols)` `(row, col)` pairs sorted by row.
///
/// Shortest-augmenting-path form of the Hungarian algorithm with row and
/// column potentials, O(n²m). Columns are scanned in ascending order and only
/// strict improvements are taken, so ties resolve toward lower indices.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Vec::new();
    }
    if n > m {
        let transposed: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect();
        let mut pairs: Vec<_> = min_cost_assignment(&transposed).into_iter().map(|(j, i)| (i, j)).collect();
        pairs.sort_unstable();
        return pairs;
    }

    // 1-based: row/column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<_> = (1..=m).filter(|&j| row_of[j] != 0).map(|j| (row_of[j] - 1, j - 1)).collect();
    pairs.sort_unstable();
    pairs
}

/// Associates detections to tracks given the gated squared distances
/// (`None` where the gate failed).
///
/// The result pairs as many gated (track, detection) pairs as possible and,
/// among those maximal matchings, minimizes the total d².
pub fn associate(gated: &[Vec<Option<f64>>], n_detections: usize) -> Assignment {
    let n_tracks = gated.len();
    debug_assert!(gated.iter().all(|row| row.len() == n_detections));

    let gated_total: f64 = gated.iter().flatten().flatten().sum();
    // Larger than any sum of gated costs, so one extra gated pair always wins.
    let forbidden = 1.0 + 2.0 * gated_total;
    let any_gated = gated.iter().flatten().any(Option::is_some);

    let pairs: Vec<(usize, usize)> = if any_gated {
        let cost: Vec<Vec<f64>> = gated
            .iter()
            .map(|row| row.iter().map(|c| c.unwrap_or(forbidden)).collect())
            .collect();
        min_cost_assignment(&cost).into_iter().filter(|&(i, j)| gated[i][j].is_some()).collect()
    } else {
        Vec::new()
    };

    let mut track_used = vec![false; n_tracks];
    let mut det_used = vec![false; n_detections];
    for &(i, j) in &pairs {
        track_used[i] = true;
        det_used[j] = true;
    }
    Assignment {
        pairs,
        unassigned_tracks: (0..n_tracks).filter(|&i| !track_used[i]).collect(),
        unassigned_detections: (0..n_detections).filter(|&j| !det_used[j]).collect(),
    }
}
