use super::GroundMetric;
use crate::error::{Error, Result};
use crate::measures::Point;

/// Exhaustive search refuses anything larger (9! ≈ 3.6e5 bijections).
pub const BRUTE_FORCE_MAX: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Total (not averaged) distance of the matched pairs.
    pub cost: f64,
    /// `assignment[i]` is the index in `B` matched to `A[i]`.
    pub assignment: Vec<usize>,
}

fn check_sets(a: &[Point], b: &[Point], metric: &GroundMetric) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let domain = metric.domain();
    a.iter().chain(b).try_for_each(|&p| domain.check_point(p))
}

/// Minimum-weight perfect matching between equal-size point sets, by the
/// O(k³) shortest-augmenting-path Hungarian method with row/column
/// potentials.
pub fn min_weight_matching(a: &[Point], b: &[Point], metric: &GroundMetric) -> Result<Matching> {
    check_sets(a, b, metric)?;
    let k = a.len();
    let cost = |i: usize, j: usize| metric.dist(a[i - 1], b[j - 1]);

    // 1-based; column 0 is the virtual start of each augmenting path.
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; k];
    for j in 1..=k {
        assignment[owner[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| metric.dist(a[i], b[j]))
        .sum();
    Ok(Matching {
        cost: total,
        assignment,
    })
}

/// Minimum over all `k!` bijections, enumerated with Heap's algorithm.
pub fn brute_force_matching(a: &[Point], b: &[Point], metric: &GroundMetric) -> Result<f64> {
    check_sets(a, b, metric)?;
    let k = a.len();
    if k > BRUTE_FORCE_MAX {
        return Err(Error::SizeGuard(format!(
            "exhaustive matching limited to {BRUTE_FORCE_MAX} points, got {k}"
        )));
    }
    let eval = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| metric.dist(a[i], b[j]))
            .sum()
    };
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = eval(&perm);
    let mut c = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Domain;
    use rand::seq::index;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sets(seed: u64, n: usize, k: usize) -> (Vec<Point>, Vec<Point>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pick = || -> Vec<Point> {
            index::sample(&mut rng, n * n, k)
                .into_iter()
                .map(|i| (i / n, i % n))
                .collect()
        };
        (pick(), pick())
    }

    #[test]
    fn identical_sets_cost_zero() {
        let metric = GroundMetric::new(Domain::grid(10).unwrap());
        let (a, _) = random_sets(1, 10, 7);
        let m = min_weight_matching(&a, &a, &metric).unwrap();
        assert_eq!(m.cost, 0.0);
        assert_eq!(m.assignment, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn single_pair() {
        let metric = GroundMetric::new(Domain::grid(10).unwrap());
        let m = min_weight_matching(&[(1, 1)], &[(4, 5)], &metric).unwrap();
        assert_eq!(m.cost, 5.0);
        assert_eq!(brute_force_matching(&[(1, 1)], &[(4, 5)], &metric).unwrap(), 5.0);
    }

    #[test]
    fn two_points_take_the_cheaper_pairing() {
        let metric = GroundMetric::new(Domain::grid(10).unwrap());
        let a = [(0, 0), (0, 9)];
        let b = [(1, 9), (1, 0)];
        let straight = metric.dist(a[0], b[0]) + metric.dist(a[1], b[1]);
        let crossed = metric.dist(a[0], b[1]) + metric.dist(a[1], b[0]);
        let want = straight.min(crossed);
        assert_eq!(brute_force_matching(&a, &b, &metric).unwrap(), want);
        assert_eq!(min_weight_matching(&a, &b, &metric).unwrap().cost, want);
    }

    #[test]
    fn seeded_instances_agree_with_exhaustive_search() {
        for (seed, k) in [(3u64, 5usize), (7, 6)] {
            for domain in [Domain::grid(16).unwrap(), Domain::torus(16).unwrap()] {
                let metric = GroundMetric::new(domain);
                let (a, b) = random_sets(seed, 16, k);
                let oracle = brute_force_matching(&a, &b, &metric).unwrap();
                let m = min_weight_matching(&a, &b, &metric).unwrap();
                assert!((m.cost - oracle).abs() <= 1e-9 * oracle.max(1.0));
                let mut seen = m.assignment.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..k).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn errors() {
        let metric = GroundMetric::new(Domain::grid(4).unwrap());
        assert!(matches!(
            min_weight_matching(&[(0, 0)], &[], &metric),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            min_weight_matching(&[], &[], &metric),
            Err(Error::EmptyPointSet)
        ));
        assert!(matches!(
            min_weight_matching(&[(4, 0)], &[(0, 0)], &metric),
            Err(Error::OutOfRange { .. })
        ));
        let ten: Vec<Point> = (0..10).map(|i| (i % 4, i / 4)).collect();
        assert!(matches!(
            brute_force_matching(&ten, &ten, &metric),
            Err(Error::SizeGuard(_))
        ));
    }
}
