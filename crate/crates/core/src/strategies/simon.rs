use super::{Distinguisher, DistinguisherInput, DistinguisherResult};
use crate::error::{Error, Result};
use crate::families::{FamilyMetadata, SimonInstance};
use crate::qsim::SampleBatch;

/// Reduced row echelon form over GF(2); returns the nonzero rows and the
/// pivot column of each.
fn rref(rows: &[u64], n: usize) -> (Vec<u64>, Vec<usize>) {
    let mut basis: Vec<u64> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for &row in rows {
        let mut v = row & mask(n);
        for (b, &p) in basis.iter().zip(&pivots) {
            if (v >> p) & 1 == 1 {
                v ^= b;
            }
        }
        if v == 0 {
            continue;
        }
        let p = v.trailing_zeros() as usize;
        for b in basis.iter_mut() {
            if (*b >> p) & 1 == 1 {
                *b ^= v;
            }
        }
        basis.push(v);
        pivots.push(p);
    }
    (basis, pivots)
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn gf2_rank(rows: &[u64], n: usize) -> usize {
    rref(rows, n).0.len()
}

/// Basis of `{v : row . v = 0 for every row}` over GF(2)^n.
pub fn gf2_null_space(rows: &[u64], n: usize) -> Vec<u64> {
    let (basis, pivots) = rref(rows, n);
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = 1u64 << free;
            for (b, &p) in basis.iter().zip(&pivots) {
                if (b >> free) & 1 == 1 {
                    v |= 1 << p;
                }
            }
            v
        })
        .collect()
}

/// Accept iff the batch pins down a unique nonzero candidate `s'` and
/// `f(0) = f(s')`.
pub fn simon_distinguisher(instance: &SimonInstance, batch: &SampleBatch) -> Result<DistinguisherResult> {
    if batch.num_bits != instance.n {
        return Err(Error::DimensionMismatch {
            expected: instance.n,
            actual: batch.num_bits,
        });
    }
    let null = gf2_null_space(&batch.samples, instance.n);
    let accept = match null.as_slice() {
        [candidate] => *candidate != 0 && instance.table[0] == instance.table[*candidate as usize],
        _ => false,
    };
    Ok(DistinguisherResult {
        decision: accept,
        score: if accept { 1.0 } else { 0.0 },
    })
}

/// Game wrapper: reads the oracle table from the draw's metadata.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimonDistinguisher;

impl Distinguisher for SimonDistinguisher {
    fn name(&self) -> String {
        "simon".into()
    }

    fn decide(&self, input: &DistinguisherInput<'_>) -> Result<DistinguisherResult> {
        match input.metadata {
            Some(FamilyMetadata::Simon(inst)) => simon_distinguisher(inst, input.batch),
            _ => Err(Error::Unsupported {
                name: self.name(),
                reason: "needs a Simon instance".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_known_system() {
        // Rows orthogonal to s = 0b011 in GF(2)^3.
        let rows = [0b011, 0b100, 0b111];
        assert_eq!(gf2_rank(&rows, 3), 2);
        assert_eq!(gf2_null_space(&rows, 3), vec![0b011]);
        assert_eq!(gf2_null_space(&[], 2).len(), 2);
        assert!(gf2_null_space(&[0b01, 0b10], 2).is_empty());
    }

    #[test]
    fn all_zero_batch_rejected() {
        let inst = SimonInstance::generate(4, 0b1010, 1).unwrap();
        let b = SampleBatch::new(4, vec![0; 12], "t", 0).unwrap();
        assert!(!simon_distinguisher(&inst, &b).unwrap().decision);
    }

    #[test]
    fn spanning_orthogonal_rows_accepted() {
        let s = 0b1010u64;
        let inst = SimonInstance::generate(4, s, 1).unwrap();
        let rows: Vec<u64> = (0..16).filter(|y: &u64| (y & s).count_ones() % 2 == 0).collect();
        let b = SampleBatch::new(4, rows, "t", 0).unwrap();
        assert!(simon_distinguisher(&inst, &b).unwrap().decision);
    }

    #[test]
    fn wrong_unique_candidate_rejected() {
        let inst = SimonInstance::generate(3, 0b011, 1).unwrap();
        // Null space {0, 0b100}, which is not the shift.
        let b = SampleBatch::new(3, vec![0b001, 0b010], "t", 0).unwrap();
        assert!(!simon_distinguisher(&inst, &b).unwrap().decision);
    }
}
