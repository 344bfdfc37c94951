//! Outage models for Rayleigh-faded downlinks with statistical CSI at the
//! transmitter.
//!
//! Three regimes are covered:
//!
//! * OMA: one client served at full power.
//! * Two-client NOMA with a power split `(alpha1, alpha2)`, where client 1 is
//!   the near user and client 2 the far user.
//! * K-client SIC NOMA over an arbitrary served subset, expressed through the
//!   transformed ("hat") powers that turn the SIC feasibility conditions into
//!   positivity constraints.
//!
//! All quantities are linear scale. Every outage probability has the form
//! `1 - exp(-x)` and is evaluated as `-expm1(-x)`.

use crate::error::{Error, Result};

/// Physical setup shared by every client.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    distances: Vec<f64>,
    path_loss_exp: f64,
    noise_power: f64,
    power_budget: f64,
    target_rate: f64,
}

fn positive_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

/// Converts a dB value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ChannelParams {
    pub fn new(
        distances: Vec<f64>,
        path_loss_exp: f64,
        noise_power: f64,
        power_budget: f64,
        target_rate: f64,
    ) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::invalid(
                "distances",
                "at least one client is required",
            ));
        }
        for &d in &distances {
            positive_finite("distances", d)?;
        }
        positive_finite("path_loss_exp", path_loss_exp)?;
        positive_finite("noise_power", noise_power)?;
        positive_finite("power_budget", power_budget)?;
        positive_finite("target_rate", target_rate)?;
        Ok(Self {
            distances,
            path_loss_exp,
            noise_power,
            power_budget,
            target_rate,
        })
    }

    /// Unit power budget with noise power `1/snr`.
    pub fn from_snr(
        distances: Vec<f64>,
        path_loss_exp: f64,
        snr: f64,
        target_rate: f64,
    ) -> Result<Self> {
        let snr = positive_finite("snr", snr)?;
        Self::new(distances, path_loss_exp, 1.0 / snr, 1.0, target_rate)
    }

    pub fn from_snr_db(
        distances: Vec<f64>,
        path_loss_exp: f64,
        snr_db: f64,
        target_rate: f64,
    ) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::invalid(
                "snr_db",
                format!("must be finite, got {snr_db}"),
            ));
        }
        Self::from_snr(distances, path_loss_exp, db_to_linear(snr_db), target_rate)
    }

    /// Same geometry at a different transmission SNR (unit budget).
    pub fn with_snr_db(&self, snr_db: f64) -> Result<Self> {
        Self::from_snr_db(
            self.distances.clone(),
            self.path_loss_exp,
            snr_db,
            self.target_rate,
        )
    }

    pub fn num_clients(&self) -> usize {
        self.distances.len()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn distance(&self, client: usize) -> f64 {
        self.distances[client]
    }

    pub fn path_loss_exp(&self) -> f64 {
        self.path_loss_exp
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn target_rate(&self) -> f64 {
        self.target_rate
    }

    /// Transmission SNR `p̄ / σ²`.
    pub fn snr(&self) -> f64 {
        self.power_budget / self.noise_power
    }

    /// `r = 2^R - 1`.
    pub fn rate_factor(&self) -> f64 {
        self.target_rate.exp2() - 1.0
    }

    /// Outage scale `d^τ · r · σ²` of a client at distance `d`: a client
    /// receiving effective power `x` is in outage with probability
    /// `1 - exp(-scale / x)`.
    pub fn scale_at(&self, d: f64) -> f64 {
        d.powf(self.path_loss_exp) * self.rate_factor() * self.noise_power
    }

    pub fn scale(&self, client: usize) -> f64 {
        self.scale_at(self.distances[client])
    }

    /// SIC decoding order of a client subset: farthest client first, ties
    /// broken by client index.
    pub fn decoding_order(&self, clients: &[usize]) -> Vec<usize> {
        let mut order = clients.to_vec();
        order.sort_by(|&a, &b| {
            self.distances[b]
                .total_cmp(&self.distances[a])
                .then(a.cmp(&b))
        });
        order
    }

    /// OMA outage of a given client at full budget.
    pub fn oma_outage_of(&self, client: usize) -> f64 {
        outage_from_exponent(self.scale(client) / self.power_budget)
    }
}

#[inline]
fn outage_from_exponent(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// OMA outage `1 - exp(-(2^R - 1) d^τ / ρ)` of a client at distance `d`.
pub fn oma_outage(d: f64, params: &ChannelParams) -> Result<f64> {
    positive_finite("d", d)?;
    Ok(outage_from_exponent(
        params.scale_at(d) / params.power_budget,
    ))
}

/// Lower end (exclusive) of the admissible far-user power fraction:
/// `alpha2 > r / (1 + r) = (2^R - 1) / 2^R`.
pub fn min_far_fraction(params: &ChannelParams) -> f64 {
    let r = params.rate_factor();
    r / (1.0 + r)
}

/// Power fraction at which the near user's outage is minimal, `2^R / (2^R + 1)`.
pub fn near_optimal_far_fraction(params: &ChannelParams) -> f64 {
    let g = params.target_rate.exp2();
    g / (g + 1.0)
}

fn sinr_margin(alpha2: f64, params: &ChannelParams) -> Result<f64> {
    if !alpha2.is_finite() || alpha2 >= 1.0 {
        return Err(Error::ConstraintViolation(format!(
            "far-user power fraction must lie in (r/(1+r), 1), got {alpha2}"
        )));
    }
    let margin = alpha2 - (1.0 - alpha2) * params.rate_factor();
    if margin <= 0.0 {
        return Err(Error::ConstraintViolation(format!(
            "far-user power fraction {alpha2} does not exceed r/(1+r) = {}",
            min_far_fraction(params)
        )));
    }
    Ok(margin)
}

/// Two-client NOMA outage of the far user (client 2), which decodes its
/// message treating the near user's signal as interference.
pub fn noma2_outage_far(alpha2: f64, d2: f64, params: &ChannelParams) -> Result<f64> {
    positive_finite("d2", d2)?;
    let margin = sinr_margin(alpha2, params)?;
    let x = params.scale_at(d2) / (params.power_budget * margin);
    Ok(outage_from_exponent(x))
}

/// Two-client NOMA outage of the near user (client 1), which must first
/// decode and cancel the far user's message.
pub fn noma2_outage_near(alpha2: f64, d1: f64, params: &ChannelParams) -> Result<f64> {
    positive_finite("d1", d1)?;
    let margin = sinr_margin(alpha2, params)?;
    let alpha1 = 1.0 - alpha2;
    let s = params.scale_at(d1) / params.power_budget;
    Ok(outage_from_exponent((s / margin).max(s / alpha1)))
}

/// Served clients of a K-user NOMA transmission together with their raw
/// and transformed powers, all listed in SIC decoding order.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    served: Vec<usize>,
    raw: Vec<f64>,
    hat: Vec<f64>,
}

impl PowerAllocation {
    /// `served` must already be in decoding order.
    pub fn from_raw(served: Vec<usize>, raw: Vec<f64>, rate_factor: f64) -> Result<Self> {
        check_served(&served, raw.len())?;
        let hat = to_hat_powers(&raw, rate_factor);
        Ok(Self { served, raw, hat })
    }

    pub fn from_hat(served: Vec<usize>, hat: Vec<f64>, rate_factor: f64) -> Result<Self> {
        check_served(&served, hat.len())?;
        let raw = from_hat_powers(&hat, rate_factor);
        Ok(Self { served, raw, hat })
    }

    /// A single client served at full budget.
    pub fn oma(client: usize, budget: f64) -> Self {
        Self {
            served: vec![client],
            raw: vec![budget],
            hat: vec![budget],
        }
    }

    pub fn served(&self) -> &[usize] {
        &self.served
    }

    pub fn raw_powers(&self) -> &[f64] {
        &self.raw
    }

    pub fn hat_powers(&self) -> &[f64] {
        &self.hat
    }

    pub fn len(&self) -> usize {
        self.served.len()
    }

    pub fn is_empty(&self) -> bool {
        self.served.is_empty()
    }

    /// Raw power of `client`, zero when it is not served.
    pub fn raw_power(&self, client: usize) -> f64 {
        self.served
            .iter()
            .position(|&c| c == client)
            .map_or(0.0, |k| self.raw[k])
    }

    pub fn total_power(&self) -> f64 {
        self.raw.iter().sum()
    }

    /// Budget respected (with `1e-9` relative slack) and every transformed
    /// power strictly positive.
    pub fn is_feasible(&self, budget: f64) -> bool {
        self.total_power() <= budget * (1.0 + 1e-9) && self.hat.iter().all(|&p| p > 0.0)
    }
}

fn check_served(served: &[usize], powers: usize) -> Result<()> {
    if served.len() != powers {
        return Err(Error::LengthMismatch {
            expected: served.len(),
            actual: powers,
        });
    }
    let mut seen = served.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != served.len() {
        return Err(Error::invalid("served", "duplicate client in served set"));
    }
    Ok(())
}

/// Outage of one served client under K-user SIC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KOutage {
    pub probability: f64,
    /// A transformed power at or before this decoding position is
    /// non-positive, so decoding can never succeed.
    pub always_outage: bool,
}

/// Outage of the client at decoding position `position` (zero based).
pub fn noma_k_outage(
    alloc: &PowerAllocation,
    position: usize,
    params: &ChannelParams,
) -> Result<KOutage> {
    if position >= alloc.len() {
        return Err(Error::invalid(
            "position",
            format!(
                "decoding position {position} out of range for {} served clients",
                alloc.len()
            ),
        ));
    }
    let mut worst = 0.0f64;
    for &p in &alloc.hat[..=position] {
        if p <= 0.0 {
            return Ok(KOutage {
                probability: 1.0,
                always_outage: true,
            });
        }
        worst = worst.max(1.0 / p);
    }
    let client = alloc.served[position];
    Ok(KOutage {
        probability: outage_from_exponent(params.scale(client) * worst),
        always_outage: false,
    })
}

/// Outage probabilities of every client (length `params.num_clients()`);
/// unserved clients get probability 1.
pub fn allocation_outages(alloc: &PowerAllocation, params: &ChannelParams) -> Vec<f64> {
    let mut out = vec![1.0; params.num_clients()];
    let mut worst = 0.0f64;
    let mut broken = false;
    for (k, &client) in alloc.served.iter().enumerate() {
        let p = alloc.hat[k];
        if p <= 0.0 {
            broken = true;
        }
        if broken {
            continue;
        }
        worst = worst.max(1.0 / p);
        out[client] = outage_from_exponent(params.scale(client) * worst);
    }
    out
}

/// `p̂_k = p_k - r · Σ_{i>k} p_i`, powers in decoding order.
pub fn to_hat_powers(raw: &[f64], rate_factor: f64) -> Vec<f64> {
    let mut hat = vec![0.0; raw.len()];
    let mut tail = 0.0;
    for k in (0..raw.len()).rev() {
        hat[k] = raw[k] - rate_factor * tail;
        tail += raw[k];
    }
    hat
}

/// Inverse of [`to_hat_powers`] by back substitution.
pub fn from_hat_powers(hat: &[f64], rate_factor: f64) -> Vec<f64> {
    let mut raw = vec![0.0; hat.len()];
    let mut tail = 0.0;
    for k in (0..hat.len()).rev() {
        raw[k] = hat[k] + rate_factor * tail;
        tail += raw[k];
    }
    raw
}

/// Weighted budget `Σ_k p̂_k (r+1)^k` (zero-based `k`); equals the raw
/// total power.
pub fn weighted_hat_budget(hat: &[f64], rate_factor: f64) -> f64 {
    let mut weight = 1.0;
    let mut total = 0.0;
    for &p in hat {
        total += p * weight;
        weight *= rate_factor + 1.0;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cell() -> ChannelParams {
        ChannelParams::from_snr_db(vec![2.0, 4.0], 2.0, 18.0, 1.0).unwrap()
    }

    #[test]
    fn oma_reference_values() {
        let p = two_cell();
        assert!((oma_outage(2.0, &p).unwrap() - 0.061428).abs() < 1e-5);
        assert!((oma_outage(4.0, &p).unwrap() - 0.223985).abs() < 1e-5);
    }

    #[test]
    fn oma_vanishing_rate() {
        let p = ChannelParams::from_snr_db(vec![3.0], 2.0, 18.0, 1e-12).unwrap();
        assert!(oma_outage(3.0, &p).unwrap() < 1e-9);
    }

    #[test]
    fn oma_rejects_bad_distance() {
        let p = two_cell();
        assert!(oma_outage(0.0, &p).is_err());
        assert!(oma_outage(f64::NAN, &p).is_err());
        assert!(oma_outage(-1.0, &p).is_err());
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(ChannelParams::new(vec![], 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(vec![1.0], 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(vec![1.0], 2.0, -1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(vec![1.0], 2.0, 1.0, f64::INFINITY, 1.0).is_err());
        assert!(ChannelParams::new(vec![1.0], 2.0, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::from_snr_db(vec![1.0], 2.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn noma_far_reference_and_limits() {
        let p = two_cell();
        let far = noma2_outage_far(0.8, 4.0, &p).unwrap();
        assert!((far - 0.344684).abs() < 1e-5);
        let near_one = noma2_outage_far(1.0 - 1e-12, 4.0, &p).unwrap();
        assert!((near_one - oma_outage(4.0, &p).unwrap()).abs() < 1e-9);
        assert!(matches!(
            noma2_outage_far(0.5, 4.0, &p),
            Err(Error::ConstraintViolation(_))
        ));
        assert!(noma2_outage_far(1.0, 4.0, &p).is_err());
    }

    #[test]
    fn noma_near_reference_values() {
        let p = two_cell();
        assert!((noma2_outage_near(0.8, 2.0, &p).unwrap() - 0.271654).abs() < 1e-5);
        let tie = noma2_outage_near(2.0 / 3.0, 2.0, &p).unwrap();
        assert!((tie - 0.173196).abs() < 1e-5);
    }

    #[test]
    fn noma_near_noiseless_limit() {
        let p = ChannelParams::from_snr(vec![2.0, 4.0], 2.0, 1e15, 1.0).unwrap();
        for a in [0.55, 0.7, 0.9, 0.99] {
            assert!(noma2_outage_near(a, 2.0, &p).unwrap() < 1e-10);
        }
    }

    #[test]
    fn k_user_reference_values() {
        let p = ChannelParams::new(vec![4.0, 3.0], 2.0, 1.0, 100.0, 1.0).unwrap();
        let alloc = PowerAllocation::from_hat(vec![0, 1], vec![40.0, 30.0], 1.0).unwrap();
        let p1 = noma_k_outage(&alloc, 0, &p).unwrap();
        let p2 = noma_k_outage(&alloc, 1, &p).unwrap();
        assert!((p1.probability - 0.329680).abs() < 1e-5);
        assert!((p2.probability - 0.259182).abs() < 1e-5);
        assert!(!p1.always_outage && !p2.always_outage);
    }

    #[test]
    fn k_user_single_client_is_oma() {
        let p = ChannelParams::from_snr_db(vec![3.0], 2.0, 12.0, 1.0).unwrap();
        let alloc = PowerAllocation::oma(0, p.power_budget());
        let k = noma_k_outage(&alloc, 0, &p).unwrap();
        assert_eq!(k.probability, oma_outage(3.0, &p).unwrap());
    }

    #[test]
    fn k_user_nonpositive_hat_is_always_outage() {
        let p = ChannelParams::new(vec![4.0, 3.0], 2.0, 1.0, 1.0, 1.0).unwrap();
        let alloc = PowerAllocation::from_raw(vec![0, 1], vec![0.4, 0.6], 1.0).unwrap();
        assert!((alloc.hat_powers()[0] + 0.2).abs() < 1e-15);
        for k in 0..2 {
            let o = noma_k_outage(&alloc, k, &p).unwrap();
            assert_eq!(o.probability, 1.0);
            assert!(o.always_outage);
        }
        assert!(!alloc.is_feasible(1.0));
        assert_eq!(allocation_outages(&alloc, &p), vec![1.0, 1.0]);
        assert!(noma_k_outage(&alloc, 2, &p).is_err());
    }

    #[test]
    fn hat_transform_examples() {
        let hat = to_hat_powers(&[0.7, 0.3], 1.0);
        assert!((hat[0] - 0.4).abs() < 1e-15 && (hat[1] - 0.3).abs() < 1e-15);
        assert!((weighted_hat_budget(&hat, 1.0) - 1.0).abs() < 1e-15);

        assert_eq!(to_hat_powers(&[4.0, 2.0, 1.0], 1.0), vec![1.0, 1.0, 1.0]);
        assert_eq!(weighted_hat_budget(&[1.0, 1.0, 1.0], 1.0), 7.0);

        let raw = from_hat_powers(&[0.4, 0.3], 1.0);
        assert!((raw[0] - 0.7).abs() < 1e-15 && (raw[1] - 0.3).abs() < 1e-15);
        assert_eq!(from_hat_powers(&[1.0, 1.0, 1.0], 1.0), vec![4.0, 2.0, 1.0]);
    }

    #[test]
    fn decoding_order_is_farthest_first() {
        let p = ChannelParams::from_snr_db(vec![2.0, 4.0, 3.0, 4.0], 2.0, 10.0, 1.0).unwrap();
        assert_eq!(p.decoding_order(&[0, 1, 2, 3]), vec![1, 3, 2, 0]);
    }

    #[test]
    fn allocation_raw_power_lookup() {
        let a = PowerAllocation::from_raw(vec![2, 0], vec![0.7, 0.3], 1.0).unwrap();
        assert_eq!(a.raw_power(2), 0.7);
        assert_eq!(a.raw_power(1), 0.0);
        assert!(PowerAllocation::from_raw(vec![1, 1], vec![0.5, 0.5], 1.0).is_err());
        assert!(PowerAllocation::from_raw(vec![1], vec![0.5, 0.5], 1.0).is_err());
    }
}
