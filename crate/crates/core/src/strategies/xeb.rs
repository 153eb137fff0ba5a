use super::{Distinguisher, DistinguisherInput, DistinguisherResult};
use crate::error::{invalid, Error, Result};
use crate::qsim::{output_distribution, Circuit, Distribution, SampleBatch};

/// `1.5 / 2^n`, halfway between the uniform and Porter-Thomas anchors.
pub fn default_xeb_threshold(num_bits: usize) -> f64 {
    1.5 / (1u64 << num_bits) as f64
}

/// Mean of `p_C(x_i)` over the batch, using a precomputed `D_C`.
pub fn xeb_score_with(dist: &Distribution, batch: &SampleBatch) -> Result<f64> {
    if dist.num_bits() != batch.num_bits {
        return Err(Error::DimensionMismatch {
            expected: dist.num_bits(),
            actual: batch.num_bits,
        });
    }
    if batch.is_empty() {
        return Err(invalid("batch", "XEB needs at least one sample"));
    }
    let total: f64 = batch.samples.iter().map(|&x| dist.prob(x)).sum();
    Ok(total / batch.len() as f64)
}

pub fn xeb_score(circuit: &Circuit, batch: &SampleBatch) -> Result<f64> {
    if circuit.num_outcome_bits() != batch.num_bits {
        return Err(Error::DimensionMismatch {
            expected: circuit.num_outcome_bits(),
            actual: batch.num_bits,
        });
    }
    xeb_score_with(&output_distribution(circuit)?, batch)
}

/// Accept iff the XEB score reaches `threshold`.
pub fn xeb_distinguisher(circuit: &Circuit, batch: &SampleBatch, threshold: f64) -> Result<DistinguisherResult> {
    check_threshold(threshold)?;
    let score = xeb_score(circuit, batch)?;
    Ok(DistinguisherResult {
        decision: score >= threshold,
        score,
    })
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("threshold", format!("{t} is not a nonnegative number")));
    }
    Ok(())
}

/// XEB as a game distinguisher. It never reads the spoofer description.
#[derive(Clone, Copy, Debug, Default)]
pub struct XebDistinguisher {
    pub threshold: Option<f64>,
}

impl Distinguisher for XebDistinguisher {
    fn name(&self) -> String {
        "xeb".into()
    }

    fn decide(&self, input: &DistinguisherInput<'_>) -> Result<DistinguisherResult> {
        let circuit = input.circuit.ok_or_else(|| Error::Unsupported {
            name: self.name(),
            reason: "XEB needs the circuit".into(),
        })?;
        let threshold = self.threshold.unwrap_or_else(|| default_xeb_threshold(input.batch.num_bits));
        check_threshold(threshold)?;
        let score = match input.exact {
            Some(d) => xeb_score_with(d, input.batch)?,
            None => xeb_score(circuit, input.batch)?,
        };
        Ok(DistinguisherResult {
            decision: score >= threshold,
            score,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Gate;

    #[test]
    fn identity_circuit_scores_one() {
        let b = SampleBatch::new(3, vec![0; 10], "t", 0).unwrap();
        assert_eq!(xeb_score(&Circuit::new(3), &b).unwrap(), 1.0);
    }

    #[test]
    fn zero_threshold_always_accepts() {
        let c = Circuit::with_gates(2, vec![Gate::X(0)]);
        let b = SampleBatch::new(2, vec![0, 2, 3], "t", 0).unwrap();
        let r = xeb_distinguisher(&c, &b, 0.0).unwrap();
        assert!(r.decision);
        assert_eq!(r.score, 0.0);
        assert!(xeb_distinguisher(&c, &b, -1.0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let b = SampleBatch::new(2, vec![0], "t", 0).unwrap();
        assert!(xeb_score(&Circuit::new(3), &b).is_err());
    }
}
