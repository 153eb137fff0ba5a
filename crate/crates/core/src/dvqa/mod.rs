//! Designated-verifier proof of quantumness with a Rabin trapdoor function.
//!
//! Public parameters are Blum integers `N = pq`; the verification key is
//! their factorization. Per round the prover commits `y = x^2 mod N`, the
//! challenge bit is the first bit of `SHA-256(domain || pp || i || y)`, and
//! the prover either opens a root (`b = 0`) or sends a nonzero mask `d`
//! with `m = <d, x0 ^ x1>` over GF(2), where `x0, x1` are the two
//! essentially distinct roots of `y`, each taken as `min(r, N - r)` and
//! encoded little-endian in the modulus width. Only the holder of the
//! factorization can check `m`.
//!
//! The honest prover stands in for quantum claw access by factoring `N`
//! with bounded trial division. Nothing here is hard at these key sizes.

pub mod arith;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::seed::{self, stream};
use arith::{blum_prime, crt, gcd, is_qr_mod_prime, mul_mod, sqrt_mod_blum_prime};

pub const HASH_ID: &str = "sha256";
pub const DEFAULT_MODULUS_BITS: u32 = 32;
/// Trial divisions the honest prover may spend per round.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 24;
const CHALLENGE_DOMAIN: &[u8] = b"vqalab/dvqa-challenge/v1";
const PRIME_ATTEMPTS: usize = 1 << 20;

mod hex_u64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{v:x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        let digits = text.strip_prefix("0x").ok_or_else(|| D::Error::custom("expected 0x-prefixed hex"))?;
        u64::from_str_radix(digits, 16).map_err(D::Error::custom)
    }
}

/// A hex-encoded integer in serialized form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HexInt(#[serde(with = "hex_u64")] pub u64);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicParams {
    pub hash: String,
    pub modulus_bits: u32,
    pub moduli: Vec<HexInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorPair {
    pub p: HexInt,
    pub q: HexInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationKey {
    pub factors: Vec<FactorPair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvqaKeys {
    pub pp: PublicParams,
    pub vk: VerificationKey,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Response {
    Root { x: HexInt },
    Parity { d: HexInt, m: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Round {
    pub y: HexInt,
    pub b: u8,
    pub response: Response,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvqaTranscript {
    pub rounds: Vec<Round>,
}

impl PublicParams {
    pub fn rounds(&self) -> usize {
        self.moduli.len()
    }

    fn width_mask(&self) -> u64 {
        if self.modulus_bits >= 64 {
            u64::MAX
        } else {
            (1u64 << self.modulus_bits) - 1
        }
    }
}

/// `k` Blum integers of exactly `modulus_bits` bits; deterministic per seed.
pub fn setup(modulus_bits: u32, k: usize, seed: u64) -> Result<DvqaKeys> {
    if !(16..=64).contains(&modulus_bits) {
        return Err(invalid("modulus_bits", "must be in 16..=64"));
    }
    if k == 0 {
        return Err(invalid("k", "need at least one round"));
    }
    let p_bits = modulus_bits.div_ceil(2);
    let q_bits = modulus_bits - p_bits;
    let mut moduli = Vec::with_capacity(k);
    let mut factors = Vec::with_capacity(k);
    for i in 0..k as u64 {
        let mut rng = seed::rng_at(seed, &[stream::KEY, i]);
        let exhausted = || Error::KeyGeneration(format!("no suitable prime after {PRIME_ATTEMPTS} candidates"));
        let p = blum_prime(p_bits, PRIME_ATTEMPTS, &mut rng).ok_or_else(exhausted)?;
        let q = (0..PRIME_ATTEMPTS)
            .find_map(|_| blum_prime(q_bits, PRIME_ATTEMPTS, &mut rng).filter(|&q| q != p))
            .ok_or_else(exhausted)?;
        moduli.push(HexInt(p * q));
        factors.push(FactorPair { p: HexInt(p), q: HexInt(q) });
    }
    Ok(DvqaKeys {
        pp: PublicParams {
            hash: HASH_ID.into(),
            modulus_bits,
            moduli,
        },
        vk: VerificationKey { factors },
    })
}

/// The random-oracle challenge for round `i`: first bit of the digest.
pub fn challenge_bit(pp: &PublicParams, i: usize, y: u64) -> u8 {
    let mut h = Sha256::new();
    h.update(CHALLENGE_DOMAIN);
    h.update(pp.hash.as_bytes());
    h.update(pp.modulus_bits.to_le_bytes());
    h.update((pp.moduli.len() as u64).to_le_bytes());
    for n in &pp.moduli {
        h.update(n.0.to_le_bytes());
    }
    h.update((i as u64).to_le_bytes());
    h.update(y.to_le_bytes());
    h.finalize()[0] >> 7
}

fn canonical(r: u64, n: u64) -> u64 {
    r.min(n - r)
}

fn parity(v: u64) -> u8 {
    (v.count_ones() & 1) as u8
}

/// The two essentially distinct roots of a residue `y` mod `pq`, canonical.
fn root_pair(y: u64, p: u64, q: u64) -> Option<(u64, u64)> {
    if !is_qr_mod_prime(y, p) || !is_qr_mod_prime(y, q) {
        return None;
    }
    let (rp, rq) = (sqrt_mod_blum_prime(y % p, p), sqrt_mod_blum_prime(y % q, q));
    let n = p * q;
    Some((canonical(crt(rp, p, rq, q), n), canonical(crt(rp, p, q - rq, q), n)))
}

/// Smallest nontrivial factor of `n` by trial division within `budget` steps.
fn find_factor(n: u64, budget: u64) -> Result<u64> {
    if n % 2 == 0 {
        return Ok(2);
    }
    let mut d = 3u64;
    let mut steps = 0u64;
    while d.saturating_mul(d) <= n {
        if steps >= budget {
            return Err(Error::SearchBudget { budget });
        }
        if n % d == 0 {
            return Ok(d);
        }
        d += 2;
        steps += 1;
    }
    Err(invalid("modulus", format!("{n} is prime")))
}

fn random_unit<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    loop {
        let x = rng.random_range(1..n);
        if gcd(x, n) == 1 {
            return x;
        }
    }
}

fn random_mask<R: Rng + ?Sized>(pp: &PublicParams, rng: &mut R) -> u64 {
    rng.random_range(1..=pp.width_mask())
}

pub fn honest_prove(pp: &PublicParams, seed: u64) -> Result<DvqaTranscript> {
    honest_prove_with_budget(pp, seed, DEFAULT_SEARCH_BUDGET)
}

pub fn honest_prove_with_budget(pp: &PublicParams, seed: u64, budget: u64) -> Result<DvqaTranscript> {
    let rounds = pp
        .moduli
        .iter()
        .enumerate()
        .map(|(i, &HexInt(n))| {
            let mut rng = seed::rng_at(seed, &[stream::ROUND, i as u64]);
            let x = random_unit(n, &mut rng);
            let y = mul_mod(x, x, n);
            let b = challenge_bit(pp, i, y);
            let response = if b == 0 {
                Response::Root { x: HexInt(x) }
            } else {
                let p = find_factor(n, budget)?;
                let (x0, x1) = root_pair(y, p, n / p).ok_or_else(|| invalid("modulus", "not a Blum integer"))?;
                let d = random_mask(pp, &mut rng);
                Response::Parity {
                    d: HexInt(d),
                    m: parity(d & (x0 ^ x1)),
                }
            };
            Ok(Round { y: HexInt(y), b, response })
        })
        .collect::<Result<_>>()?;
    Ok(DvqaTranscript { rounds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStrategy {
    /// Knows one root: answers `b = 0` correctly and guesses `m`.
    OneRootGuess,
    /// Replays an honest transcript produced under different parameters.
    Replay,
    /// Valid challenge bits over uniformly random commitments and answers.
    RandomResponse,
    /// The honest prover itself; a null control.
    Honest,
}

pub fn classical_sim(pp: &PublicParams, strategy: SimStrategy, seed: u64) -> Result<DvqaTranscript> {
    match strategy {
        SimStrategy::Honest => honest_prove(pp, seed),
        SimStrategy::Replay => {
            let other = setup(pp.modulus_bits, pp.rounds(), seed::derive(seed, stream::KEY))?;
            honest_prove(&other.pp, seed::derive(seed, stream::OTHER))
        }
        SimStrategy::OneRootGuess | SimStrategy::RandomResponse => {
            let rounds = pp
                .moduli
                .iter()
                .enumerate()
                .map(|(i, &HexInt(n))| {
                    let mut rng = seed::rng_at(seed, &[stream::ROUND, i as u64]);
                    let random = strategy == SimStrategy::RandomResponse;
                    let x = random_unit(n, &mut rng);
                    let y = if random { rng.random_range(1..n) } else { mul_mod(x, x, n) };
                    let b = challenge_bit(pp, i, y);
                    let response = if b == 0 {
                        Response::Root {
                            x: HexInt(if random { rng.random_range(0..n) } else { x }),
                        }
                    } else {
                        Response::Parity {
                            d: HexInt(random_mask(pp, &mut rng)),
                            m: rng.random_range(0..2),
                        }
                    };
                    Round { y: HexInt(y), b, response }
                })
                .collect();
            Ok(DvqaTranscript { rounds })
        }
    }
}

fn check_keys(pp: &PublicParams, vk: &VerificationKey) -> Result<()> {
    if pp.moduli.len() != vk.factors.len() {
        return Err(Error::KeyMismatch(format!(
            "{} moduli but {} factor pairs",
            pp.moduli.len(),
            vk.factors.len()
        )));
    }
    for (i, (n, f)) in pp.moduli.iter().zip(&vk.factors).enumerate() {
        if (f.p.0 as u128) * (f.q.0 as u128) != n.0 as u128 {
            return Err(Error::KeyMismatch(format!("round {i}: p * q != N")));
        }
    }
    Ok(())
}

fn round_ok(pp: &PublicParams, i: usize, round: &Round, vk: Option<&FactorPair>) -> bool {
    let n = pp.moduli[i].0;
    let y = round.y.0;
    if y == 0 || y >= n || round.b != challenge_bit(pp, i, y) {
        return false;
    }
    match (round.b, round.response) {
        (0, Response::Root { x }) => x.0 < n && mul_mod(x.0, x.0, n) == y,
        (1, Response::Parity { d, m }) => {
            let Some(f) = vk else { return true };
            if d.0 == 0 || d.0 & !pp.width_mask() != 0 || m > 1 || gcd(y, n) != 1 {
                return false;
            }
            match root_pair(y, f.p.0, f.q.0) {
                Some((x0, x1)) => parity(d.0 & (x0 ^ x1)) == m,
                None => false,
            }
        }
        _ => false,
    }
}

/// Accept iff every round passes, using the factorization for `b = 1`.
pub fn designated_verify(pp: &PublicParams, vk: &VerificationKey, transcript: &DvqaTranscript) -> Result<bool> {
    check_keys(pp, vk)?;
    Ok(transcript.rounds.len() == pp.rounds()
        && transcript
            .rounds
            .iter()
            .enumerate()
            .all(|(i, r)| round_ok(pp, i, r, Some(&vk.factors[i]))))
}

/// A verifier without the factorization: it checks challenges and opened
/// roots and cannot check `b = 1` rounds, which it lets through.
pub fn verify_without_vk(pp: &PublicParams, transcript: &DvqaTranscript) -> bool {
    transcript.rounds.len() == pp.rounds()
        && transcript
            .rounds
            .iter()
            .enumerate()
            .all(|(i, r)| round_ok(pp, i, r, None))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DvqaReport {
    pub strategy: SimStrategy,
    pub honest_accepts: Vec<bool>,
    pub sim_accepts: Vec<bool>,
    pub honest_accept_rate: f64,
    pub sim_accept_rate: f64,
    pub advantage: f64,
    pub std_error: f64,
}

/// `q` honest and `q` simulator transcripts under fixed keys.
pub fn run_dvqa_game(keys: &DvqaKeys, q: usize, strategy: SimStrategy, seed: u64) -> Result<DvqaReport> {
    if q == 0 {
        return Err(invalid("q", "need at least one transcript per side"));
    }
    check_keys(&keys.pp, &keys.vk)?;
    let outcomes: Vec<(bool, bool)> = (0..q as u64)
        .into_par_iter()
        .map(|j| {
            let h = honest_prove(&keys.pp, seed::derive_path(seed, &[stream::QUANTUM, j]))?;
            let s = classical_sim(&keys.pp, strategy, seed::derive_path(seed, &[stream::CLASSICAL, j]))?;
            Ok((designated_verify(&keys.pp, &keys.vk, &h)?, designated_verify(&keys.pp, &keys.vk, &s)?))
        })
        .collect::<Result<_>>()?;
    let k = q as f64;
    let hr = outcomes.iter().filter(|o| o.0).count() as f64 / k;
    let sr = outcomes.iter().filter(|o| o.1).count() as f64 / k;
    Ok(DvqaReport {
        strategy,
        honest_accepts: outcomes.iter().map(|o| o.0).collect(),
        sim_accepts: outcomes.iter().map(|o| o.1).collect(),
        honest_accept_rate: hr,
        sim_accept_rate: sr,
        advantage: (hr - sr).abs(),
        std_error: ((hr * (1.0 - hr) + sr * (1.0 - sr)) / k).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DvqaExperiment {
    pub per_key: Vec<DvqaReport>,
    pub mean_advantage: f64,
    pub std_error: f64,
}

/// The game averaged over `key_draws` independent setups.
pub fn run_dvqa_experiment(
    modulus_bits: u32,
    k: usize,
    q: usize,
    strategy: SimStrategy,
    key_draws: usize,
    seed: u64,
) -> Result<DvqaExperiment> {
    if key_draws == 0 {
        return Err(invalid("key_draws", "need at least one setup"));
    }
    let per_key = (0..key_draws as u64)
        .map(|d| {
            let keys = setup(modulus_bits, k, seed::derive_path(seed, &[stream::KEY, d]))?;
            run_dvqa_game(&keys, q, strategy, seed::derive_path(seed, &[stream::DRAW, d]))
        })
        .collect::<Result<Vec<_>>>()?;
    let kd = key_draws as f64;
    let mean = per_key.iter().map(|r| r.advantage).sum::<f64>() / kd;
    let within = per_key.iter().map(|r| r.std_error * r.std_error).sum::<f64>() / (kd * kd);
    let between = if key_draws > 1 {
        per_key.iter().map(|r| (r.advantage - mean).powi(2)).sum::<f64>() / (kd - 1.0) / kd
    } else {
        0.0
    };
    Ok(DvqaExperiment {
        per_key,
        mean_advantage: mean,
        std_error: (within + between).sqrt(),
    })
}
