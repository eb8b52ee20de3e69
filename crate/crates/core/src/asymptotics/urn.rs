//! Chinese restaurant / Pitman–Yor urn simulation.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UrnDraw {
    pub customers: u64,
    /// Table sizes in order of creation.
    pub table_sizes: Vec<u64>,
}

impl UrnDraw {
    pub fn clusters(&self) -> u64 {
        self.table_sizes.len() as u64
    }

    /// Number of tables with exactly `j` customers.
    pub fn clusters_of_size(&self, j: u64) -> u64 {
        self.table_sizes.iter().filter(|&&s| s == j).count() as u64
    }
}

/// Seats `n` customers: customer i + 1 opens a new table with probability
/// (θ + αK)/(θ + i) and joins table k with probability (n_k - α)/(θ + i).
/// α = 0 gives the Dirichlet process urn.
pub fn simulate_urn<R: Rng + ?Sized>(
    n: u64,
    concentration: f64,
    discount: f64,
    rng: &mut R,
) -> Result<UrnDraw> {
    if !(0.0..1.0).contains(&discount) {
        return Err(Error::param(format!(
            "discount must lie in [0, 1), got {discount}"
        )));
    }
    if !(concentration > -discount) || (discount == 0.0 && concentration <= 0.0) {
        return Err(Error::param(format!(
            "invalid concentration {concentration} for discount {discount}"
        )));
    }
    let mut sizes: Vec<u64> = Vec::new();
    // Table of every seated customer, for size-proportional selection.
    let mut seat_of: Vec<usize> = Vec::with_capacity(n as usize);
    for i in 0..n {
        let k = sizes.len() as f64;
        let p_new = (concentration + discount * k) / (concentration + i as f64);
        if i == 0 || rng.random::<f64>() < p_new {
            seat_of.push(sizes.len());
            sizes.push(1);
            continue;
        }
        // Table ∝ n_k - α: choose a customer uniformly (∝ n_k) and accept
        // with probability (n_k - α)/n_k.
        loop {
            let t = seat_of[rng.random_range(0..seat_of.len())];
            let nk = sizes[t] as f64;
            if discount == 0.0 || rng.random::<f64>() < (nk - discount) / nk {
                sizes[t] += 1;
                seat_of.push(t);
                break;
            }
        }
    }
    Ok(UrnDraw {
        customers: n,
        table_sizes: sizes,
    })
}
