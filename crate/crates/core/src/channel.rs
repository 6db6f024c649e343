//! Free-space propagation, two-level directional antenna gains, and the
//! link/echo gains every other module is built on.
//!
//! All channels are pure line-of-sight Friis path loss; the planar array
//! is abstracted to two gain levels (full array gain toward the intended
//! peer, unit gain otherwise). Sensing echoes cascade two one-way losses
//! plus a fixed reflection loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Node;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

fn default_carrier_freq() -> f64 {
    2.6e9
}
fn default_tx_power_dbm() -> f64 {
    30.0
}
fn default_noise_dbm() -> f64 {
    // Thermal noise over 10 MHz (-104 dBm) plus a 10 dB noise figure.
    -94.0
}
fn default_mainlobe_gain() -> f64 {
    4.0
}
fn default_offbeam_gain() -> f64 {
    1.0
}
fn default_reflection_loss_db() -> f64 {
    10.0
}
fn default_wpt_efficiency() -> f64 {
    0.5
}
fn default_slot_duration_s() -> f64 {
    1e-3
}

/// Radio parameters shared by all links. Loadable from the `channel`
/// block of a configuration document; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    #[serde(default = "default_carrier_freq")]
    pub carrier_freq: f64,
    #[serde(default = "default_tx_power_dbm")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    /// Linear array gain toward the intended peer (4 elements -> 4.0).
    #[serde(default = "default_mainlobe_gain")]
    pub mainlobe_gain_linear: f64,
    /// Linear gain in any other direction.
    #[serde(default = "default_offbeam_gain")]
    pub offbeam_gain_linear: f64,
    /// Extra loss applied to sensing echoes, on top of both hop losses.
    #[serde(default = "default_reflection_loss_db")]
    pub reflection_loss_db: f64,
    /// RF-to-stored-energy conversion efficiency at a charging user.
    #[serde(default = "default_wpt_efficiency")]
    pub wpt_efficiency: f64,
    #[serde(default = "default_slot_duration_s")]
    pub slot_duration_s: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_freq: default_carrier_freq(),
            tx_power_dbm: default_tx_power_dbm(),
            noise_dbm: default_noise_dbm(),
            mainlobe_gain_linear: default_mainlobe_gain(),
            offbeam_gain_linear: default_offbeam_gain(),
            reflection_loss_db: default_reflection_loss_db(),
            wpt_efficiency: default_wpt_efficiency(),
            slot_duration_s: default_slot_duration_s(),
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.carrier_freq <= 0.0 {
            return Err(Error::InvalidConfig("carrier_freq must be positive".into()));
        }
        if self.mainlobe_gain_linear <= 0.0 || self.offbeam_gain_linear <= 0.0 {
            return Err(Error::InvalidConfig("array gains must be positive".into()));
        }
        if !(self.wpt_efficiency > 0.0 && self.wpt_efficiency <= 1.0) {
            return Err(Error::InvalidConfig("wpt_efficiency must be in (0, 1]".into()));
        }
        if self.slot_duration_s <= 0.0 {
            return Err(Error::InvalidConfig("slot_duration_s must be positive".into()));
        }
        if self.reflection_loss_db < 0.0 {
            return Err(Error::InvalidConfig("reflection_loss_db must be >= 0".into()));
        }
        Ok(())
    }

    pub fn mainlobe_gain_db(&self) -> f64 {
        10.0 * self.mainlobe_gain_linear.log10()
    }

    pub fn offbeam_gain_db(&self) -> f64 {
        10.0 * self.offbeam_gain_linear.log10()
    }

    /// Transmit power in watts.
    pub fn tx_power_w(&self) -> f64 {
        10f64.powf((self.tx_power_dbm - 30.0) / 10.0)
    }

    /// Noise power in milliwatts.
    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_dbm)
    }
}

/// One directional link: gain (negative for net loss) plus the distance
/// it was computed at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGain {
    pub gain_db: f64,
    pub distance_m: f64,
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Friis free-space path loss in dB:
/// `20 log10(d) + 20 log10(f) + 20 log10(4 pi / c)`.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> Result<f64> {
    if distance_m <= 0.0 {
        return Err(Error::Domain(format!(
            "free-space path loss undefined for distance {distance_m} m (co-located nodes)"
        )));
    }
    if freq_hz <= 0.0 {
        return Err(Error::Domain(format!("frequency must be positive, got {freq_hz} Hz")));
    }
    let k = 20.0 * (4.0 * std::f64::consts::PI / SPEED_OF_LIGHT_M_S).log10();
    Ok(20.0 * distance_m.log10() + 20.0 * freq_hz.log10() + k)
}

/// End-to-end link gain between two nodes: array gain minus path loss over
/// the 3-D Euclidean distance. `steered` selects the mainlobe gain.
pub fn link_gain(tx: &Node, rx: &Node, params: &ChannelParams, steered: bool) -> Result<LinkGain> {
    let distance_m = tx.pos.distance_to(&rx.pos);
    let array_db =
        if steered { params.mainlobe_gain_db() } else { params.offbeam_gain_db() };
    let loss = fspl_db(distance_m, params.carrier_freq)?;
    Ok(LinkGain { gain_db: array_db - loss, distance_m })
}

/// Received signal strength in dBm.
pub fn rss_dbm(tx_power_dbm: f64, gain: &LinkGain) -> f64 {
    tx_power_dbm + gain.gain_db
}

/// Two-hop echo gain of a bistatic sensing path, with the arrays steered
/// toward the target on both ends:
/// `2 * G_main - FSPL(tx->target) - FSPL(target->rx) - reflection_loss`.
pub fn echo_gain_db(tx: &Node, target: &Node, rx: &Node, params: &ChannelParams) -> Result<f64> {
    let d1 = tx.pos.distance_to(&target.pos);
    let d2 = target.pos.distance_to(&rx.pos);
    echo_gain_db_from_distances(d1, d2, params)
}

/// Same as [`echo_gain_db`] when only the hop distances are at hand.
pub fn echo_gain_db_from_distances(d1: f64, d2: f64, params: &ChannelParams) -> Result<f64> {
    Ok(2.0 * params.mainlobe_gain_db()
        - fspl_db(d1, params.carrier_freq)?
        - fspl_db(d2, params.carrier_freq)?
        - params.reflection_loss_db)
}
