//! Declarative description of synthetic traffic classes.
//!
//! A library is a TOML document listing benign traffic profiles and attack
//! classes. Each per-packet attribute is drawn from a [`Distribution`]: a
//! weighted mixture of uniform ranges, where `lo == hi` is a point mass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The attack library shipped with the crate (version 1).
pub const BUILTIN_LIBRARY: &str = include_str!("../../assets/attacks.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(pub Vec<Component>);

impl Distribution {
    pub fn point(v: f64) -> Self {
        Distribution(vec![Component { weight: 1.0, lo: v, hi: v }])
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Distribution(vec![Component { weight: 1.0, lo, hi }])
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::Config(format!("{what}: empty distribution")));
        }
        let mut total = 0.0;
        for c in &self.0 {
            if !(c.weight >= 0.0 && c.lo.is_finite() && c.hi.is_finite() && c.lo <= c.hi) {
                return Err(Error::Config(format!("{what}: bad component {c:?}")));
            }
            if c.lo < 0.0 {
                return Err(Error::Config(format!("{what}: negative support {c:?}")));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "{what}: weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u: f64 = rng.gen::<f64>();
        let mut chosen = self.0.last().unwrap();
        for c in &self.0 {
            if u < c.weight {
                chosen = c;
                break;
            }
            u -= c.weight;
        }
        if chosen.lo == chosen.hi {
            chosen.lo
        } else {
            rng.gen_range(chosen.lo..=chosen.hi)
        }
    }

    /// Smallest and largest value the distribution can produce.
    pub fn bounds(&self) -> (f64, f64) {
        let support = self.0.iter().filter(|c| c.weight > 0.0);
        let lo = support.clone().map(|c| c.lo).fold(f64::INFINITY, f64::min);
        let hi = support.map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// True when no positive-weight component of `self` intersects one of
    /// `other`.
    pub fn support_disjoint(&self, other: &Distribution) -> bool {
        self.0.iter().filter(|a| a.weight > 0.0).all(|a| {
            other
                .0
                .iter()
                .filter(|b| b.weight > 0.0)
                .all(|b| a.hi < b.lo || b.hi < a.lo)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    Tcp,
    Udp,
}

fn default_share() -> f64 {
    1.0
}

fn zero() -> Distribution {
    Distribution::point(0.0)
}

/// Generator for one class of traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticAttackSpec {
    pub name: String,
    pub protocol: Transport,
    /// Mixture share when several benign profiles are combined.
    #[serde(default = "default_share")]
    pub share: f64,
    /// Fixed sample count; when absent the doubling schedule decides.
    #[serde(default)]
    pub sample_count: Option<u64>,
    pub packet_length: Distribution,
    /// Packets per flow, 1..=10.
    pub flow_length: Distribution,
    /// Seconds between consecutive packets.
    pub inter_arrival: Distribution,
    pub highest_protocol: Distribution,
    pub ip_flags: Distribution,
    pub protocols: Distribution,
    #[serde(default = "zero")]
    pub tcp_ack: Distribution,
    #[serde(default = "zero")]
    pub tcp_flags: Distribution,
    #[serde(default = "zero")]
    pub tcp_window: Distribution,
    #[serde(default = "zero")]
    pub icmp_type: Distribution,
}

impl SyntheticAttackSpec {
    pub fn validate(&self) -> Result<()> {
        let n = &self.name;
        if n.is_empty() || n.contains('+') {
            return Err(Error::Config(format!("invalid class name {n:?}")));
        }
        if self.sample_count == Some(0) {
            return Err(Error::Config(format!("{n}: sample_count must be at least 1")));
        }
        if self.share.is_nan() || self.share <= 0.0 {
            return Err(Error::Config(format!("{n}: share must be positive")));
        }
        for (what, d) in [
            ("packet_length", &self.packet_length),
            ("flow_length", &self.flow_length),
            ("inter_arrival", &self.inter_arrival),
            ("highest_protocol", &self.highest_protocol),
            ("ip_flags", &self.ip_flags),
            ("protocols", &self.protocols),
            ("tcp_ack", &self.tcp_ack),
            ("tcp_flags", &self.tcp_flags),
            ("tcp_window", &self.tcp_window),
            ("icmp_type", &self.icmp_type),
        ] {
            d.validate(&format!("{n}.{what}"))?;
        }
        let (lo, hi) = self.flow_length.bounds();
        if lo < 1.0 || hi > super::PACKETS as f64 {
            return Err(Error::Config(format!(
                "{n}: flow_length support must lie in 1..={}",
                super::PACKETS
            )));
        }
        if self.packet_length.bounds().0 < 1.0 {
            return Err(Error::Config(format!("{n}: packet lengths must be at least 1 byte")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackLibrary {
    pub version: u32,
    pub benign: Vec<SyntheticAttackSpec>,
    pub attack: Vec<SyntheticAttackSpec>,
}

impl AttackLibrary {
    pub fn parse(text: &str) -> Result<Self> {
        let lib: AttackLibrary =
            toml::from_str(text).map_err(|e| Error::Config(format!("attack library: {e}")))?;
        lib.validate()?;
        Ok(lib)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LIBRARY).expect("built-in attack library is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::Config(format!(
                "unsupported attack library version {}",
                self.version
            )));
        }
        if self.benign.is_empty() || self.attack.is_empty() {
            return Err(Error::Config(
                "attack library needs at least one benign profile and one attack".into(),
            ));
        }
        for s in self.benign.iter().chain(&self.attack) {
            s.validate()?;
        }
        for (i, a) in self.attack.iter().enumerate() {
            if a.name == super::BENIGN_TAG || self.attack[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("duplicate or reserved attack name {:?}", a.name)));
            }
        }
        Ok(())
    }

    /// Keep only the named attacks, in the given order.
    pub fn select(&self, names: &[String]) -> Result<AttackLibrary> {
        let attack = names
            .iter()
            .map(|n| {
                self.attack
                    .iter()
                    .find(|a| &a.name == n)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("unknown attack {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AttackLibrary {
            version: self.version,
            benign: self.benign.clone(),
            attack,
        })
    }

    pub fn attack_names(&self) -> Vec<String> {
        self.attack.iter().map(|a| a.name.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_library_is_valid() {
        let lib = AttackLibrary::builtin();
        assert_eq!(lib.attack.len(), 13);
        assert_eq!(lib.attack[0].name, "WebDDoS");
    }

    #[test]
    fn unnormalized_distribution_rejected() {
        let d = Distribution(vec![Component { weight: 0.5, lo: 1.0, hi: 2.0 }]);
        assert!(d.validate("x").is_err());
    }

    #[test]
    fn disjointness() {
        let a = Distribution::point(40.0);
        let b = Distribution(vec![
            Component { weight: 0.5, lo: 66.0, hi: 66.0 },
            Component { weight: 0.5, lo: 70.0, hi: 80.0 },
        ]);
        assert!(a.support_disjoint(&b));
        assert!(!b.support_disjoint(&Distribution::uniform(75.0, 90.0)));
    }
}
