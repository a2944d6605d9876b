use rand::seq::SliceRandom;
use rand::Rng;

use super::{Firm, Worker};

/// Result of one month of matching.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchOutcome {
    /// `(worker id, firm index)` in the order hires happened.
    pub hires: Vec<(usize, usize)>,
    pub unfilled_firms: usize,
}

/// Random-meeting labor market segmented by sector.
///
/// `vacancies[k]` is how many workers firm `k` wants to add. In each of
/// `rounds` rounds every open vacancy, in shuffled order, meets one
/// unemployed worker of its firm's sector drawn uniformly; the worker is
/// hired iff the firm's offer is at least the worker's asking wage. Afterwards every worker still
/// unemployed lowers the asking wage by `wage_step` and every firm with an
/// open vacancy raises its offer by `wage_step`.
pub fn labor_match<R: Rng + ?Sized>(
    workers: &mut [Worker],
    firms: &mut [Firm],
    vacancies: &mut [usize],
    sectors: usize,
    rounds: usize,
    wage_step: f64,
    rng: &mut R,
) -> MatchOutcome {
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); sectors];
    for w in workers.iter() {
        if w.employer.is_none() {
            pools[w.sector].push(w.id);
        }
    }
    let mut out = MatchOutcome::default();
    let mut order: Vec<usize> = Vec::new();
    for _ in 0..rounds {
        order.clear();
        order.extend((0..firms.len()).flat_map(|k| std::iter::repeat_n(k, vacancies[k])));
        if order.is_empty() {
            break;
        }
        order.shuffle(rng);
        for &k in &order {
            if vacancies[k] == 0 {
                continue;
            }
            let pool = &mut pools[firms[k].sector];
            if pool.is_empty() {
                continue;
            }
            let r = rng.random_range(0..pool.len());
            let w = pool[r];
            if firms[k].offer_wage >= workers[w].asking_wage {
                pool.swap_remove(r);
                workers[w].employer = Some(firms[k].id);
                firms[k].employees.push(w);
                vacancies[k] -= 1;
                out.hires.push((w, k));
            }
        }
    }
    for pool in &pools {
        for &w in pool {
            workers[w].asking_wage *= 1.0 - wage_step;
        }
    }
    for (k, firm) in firms.iter_mut().enumerate() {
        if vacancies[k] > 0 {
            firm.offer_wage *= 1.0 + wage_step;
            out.unfilled_firms += 1;
        }
    }
    out
}

/// Workers a firm needs for `required_output`, rounded up after allowing
/// `tolerance` of a worker's slack.
pub fn desired_headcount(required_output: f64, productivity: f64, tolerance: f64) -> usize {
    if productivity <= 0.0 || required_output <= 0.0 {
        return 0;
    }
    (required_output / productivity - tolerance).ceil().max(0.0) as usize
}
