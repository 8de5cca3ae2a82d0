//! Device configuration files: a small TOML dialect with one canonical
//! layout, so that writing a parsed file reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::photonics::DistinguishabilityModel;
use crate::thermal::ResistorId;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "TRIPHASE_CONFIG";

/// The characterized chip, shipped with the crate.
pub const BUNDLED_DEVICE_TOML: &str = include_str!("../data/paper-device.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    pub name: String,
    pub device: DeviceParams,
    /// Two-photon indistinguishability used when no other value is given.
    pub visibility: f64,
}

const TRITTER_KEYS: [&str; 8] = ["T1A", "T2A", "T3A", "phiTA", "T1B", "T2B", "T3B", "phiTB"];
const STATIC_KEYS: [&str; 4] = ["dphi10", "dphi20", "phi0TA", "phi0TB"];
const TRITTER_THERMAL_KEYS: [&str; 4] = ["alpha_TA", "alpha_TB", "alpha_nl_TA", "alpha_nl_TB"];

fn alpha_key(nl: bool, j: usize, i: usize) -> String {
    format!("{}_{}{}", if nl { "alpha_nl" } else { "alpha" }, j + 1, i + 1)
}

/// `{:?}` is the shortest representation that parses back to the same
/// value, and always carries a decimal point or exponent.
fn num(x: f64) -> String {
    format!("{x:?}")
}

impl DeviceConfig {
    pub fn chip() -> Self {
        Self::from_toml_str(BUNDLED_DEVICE_TOML).expect("bundled configuration parses")
    }

    pub fn ideal() -> Self {
        DeviceConfig {
            name: "ideal".into(),
            device: DeviceParams::ideal(),
            visibility: 1.0,
        }
    }

    /// A bundled configuration by name: `paper-device` or `ideal`.
    pub fn bundled(name: &str) -> Option<Self> {
        match name {
            "paper-device" => Some(Self::chip()),
            "ideal" => Some(Self::ideal()),
            _ => None,
        }
    }

    /// An explicit path or bundled name, else the file named by
    /// [`CONFIG_ENV`], else the bundled chip.
    pub fn load(path: Option<&str>) -> Result<Self> {
        let env = std::env::var(CONFIG_ENV).ok();
        match path.or(env.as_deref()) {
            None => Ok(Self::chip()),
            Some(p) => match Self::bundled(p) {
                Some(c) if !Path::new(p).exists() => Ok(c),
                _ => Self::from_file(p),
            },
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn model(&self) -> DistinguishabilityModel {
        DistinguishabilityModel::new(self.visibility).expect("validated on load")
    }

    #[allow(clippy::needless_range_loop)]
    pub fn to_toml_string(&self) -> String {
        let d = &self.device;
        let th = &d.thermal;
        let mut s = String::new();
        let _ = writeln!(s, "# Angles in radians, powers in watts, resistances in ohms.");
        let _ = writeln!(s, "name = {}", Value::String(self.name.clone()));
        let _ = writeln!(s, "visibility = {}", num(self.visibility));
        s.push_str("\n[tritters]\n");
        let tv = [
            d.tritter_a.t1,
            d.tritter_a.t2,
            d.tritter_a.t3,
            d.tritter_a.phi,
            d.tritter_b.t1,
            d.tritter_b.t2,
            d.tritter_b.t3,
            d.tritter_b.phi,
        ];
        for (k, v) in TRITTER_KEYS.iter().zip(tv) {
            let _ = writeln!(s, "{k} = {}", num(v));
        }
        s.push_str("\n[static_phases]\n");
        let sp = &th.static_phases;
        for (k, v) in STATIC_KEYS.iter().zip([sp.dphi10, sp.dphi20, sp.phi0_ta, sp.phi0_tb]) {
            let _ = writeln!(s, "{k} = {}", num(v));
        }
        s.push_str("\n[thermal]\n");
        for nl in [false, true] {
            let m = if nl { &th.alpha_nl } else { &th.alpha };
            for i in 0..4 {
                for j in 0..2 {
                    let _ = writeln!(s, "{} = {}", alpha_key(nl, j, i), num(m[j][i]));
                }
            }
        }
        let tt = [th.alpha_t[0], th.alpha_t[1], th.alpha_t_nl[0], th.alpha_t_nl[1]];
        for (k, v) in TRITTER_THERMAL_KEYS.iter().zip(tt) {
            let _ = writeln!(s, "{k} = {}", num(v));
        }
        s.push_str("\n[resistances]\n");
        for r in ResistorId::ALL {
            let _ = writeln!(s, "{} = {}", r.name(), num(th.resistances[r.index()]));
        }
        s
    }

    #[allow(clippy::needless_range_loop)]
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(format!("device configuration: {e}")))?;
        let allowed = ["name", "visibility", "tritters", "static_phases", "thermal", "resistances"];
        if let Some(k) = root.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown configuration key `{k}`")));
        }
        let name = match root.get("name") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::Parse("`name` must be a string".into())),
            None => "unnamed".into(),
        };
        let visibility = match root.get("visibility") {
            None => 1.0,
            Some(v) => as_f64(v, "visibility")?,
        };
        let tritters = section(&root, "tritters", &TRITTER_KEYS.map(String::from))?;
        let statics = section(&root, "static_phases", &STATIC_KEYS.map(String::from))?;
        let mut thermal_keys: Vec<String> = Vec::new();
        for nl in [false, true] {
            for i in 0..4 {
                for j in 0..2 {
                    thermal_keys.push(alpha_key(nl, j, i));
                }
            }
        }
        thermal_keys.extend(TRITTER_THERMAL_KEYS.map(String::from));
        let thermal = section(&root, "thermal", &thermal_keys)?;
        let res = section(&root, "resistances", &ResistorId::ALL.map(|r| r.name().to_string()))?;

        let mut device = DeviceParams::chip();
        let (a, b) = (&mut device.tritter_a, &mut device.tritter_b);
        [a.t1, a.t2, a.t3, a.phi, b.t1, b.t2, b.t3, b.phi] = tritters[..].try_into().expect("8 keys");
        a.validate()?;
        b.validate()?;
        let th = &mut device.thermal;
        let sp = &mut th.static_phases;
        [sp.dphi10, sp.dphi20, sp.phi0_ta, sp.phi0_tb] = statics[..].try_into().expect("4 keys");
        let mut k = 0;
        for nl in [false, true] {
            for i in 0..4 {
                for j in 0..2 {
                    if nl {
                        th.alpha_nl[j][i] = thermal[k];
                    } else {
                        th.alpha[j][i] = thermal[k];
                    }
                    k += 1;
                }
            }
        }
        th.alpha_t = [thermal[16], thermal[17]];
        th.alpha_t_nl = [thermal[18], thermal[19]];
        th.resistances = res[..].try_into().expect("6 keys");
        th.validate()?;
        DistinguishabilityModel::new(visibility)?;
        Ok(DeviceConfig {
            name,
            device,
            visibility,
        })
    }
}

fn as_f64(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Parse(format!("`{key}` must be a number"))),
    }
}

/// All keys of a table, in the given order; missing or extra keys are
/// errors.
fn section(root: &Table, name: &str, keys: &[String]) -> Result<Vec<f64>> {
    let t = match root.get(name) {
        Some(Value::Table(t)) => t,
        _ => return Err(Error::Parse(format!("missing table [{name}]"))),
    };
    if let Some(k) = t.keys().find(|k| !keys.contains(k)) {
        return Err(Error::Parse(format!("unknown key `{k}` in [{name}]")));
    }
    keys.iter()
        .map(|k| {
            t.get(k)
                .ok_or_else(|| Error::Parse(format!("missing `{k}` in [{name}]")))
                .and_then(|v| as_f64(v, k))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_matches_built_in_parameters() {
        let c = DeviceConfig::chip();
        assert_eq!(c.device, DeviceParams::chip());
        assert_eq!(c.name, "paper-device");
        assert_eq!(c.visibility, 0.95);
    }

    #[test]
    fn canonical_round_trip_is_byte_stable() {
        assert_eq!(DeviceConfig::chip().to_toml_string(), BUNDLED_DEVICE_TOML);
        let mut c = DeviceConfig::ideal();
        c.device.thermal.alpha[1][2] = -0.1 + 0.2;
        let text = c.to_toml_string();
        let back = DeviceConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml_string(), text);
    }

    #[test]
    fn rejects_bad_files() {
        let good = BUNDLED_DEVICE_TOML;
        assert!(DeviceConfig::from_toml_str(&good.replace("T1A = 0.414", "T1A = 1.5")).is_err());
        assert!(DeviceConfig::from_toml_str(&good.replace("dphi10", "dphi_10")).is_err());
        assert!(DeviceConfig::from_toml_str(&good.replace("R4 = 80.0", "R4 = 0.0")).is_err());
        assert!(DeviceConfig::from_toml_str("name = [").is_err());
    }
}
