//! Load, edit and re-serialize a device configuration.

use triphase::DeviceConfig;

fn main() -> triphase::Result<()> {
    let mut cfg = DeviceConfig::load(std::env::args().nth(1).as_deref())?;
    println!("loaded `{}` (V = {})", cfg.name, cfg.visibility);
    cfg.name = "retuned".into();
    cfg.device.tritter_b.phi = 1.55;
    let text = cfg.to_toml_string();
    assert_eq!(DeviceConfig::from_toml_str(&text)?, cfg);
    print!("{text}");
    Ok(())
}
