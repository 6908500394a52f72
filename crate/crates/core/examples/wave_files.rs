//! Writing, checksumming and reading wave files, including a wave given
//! as physical velocities on a Cartesian grid.

use shearwave::shear::ShearProfile;
use shearwave::waveio::{external_from_solution, read_wave, write_wave};
use shearwave::wavesolve::{solve_wave, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("shearwave-wave-files");
    std::fs::create_dir_all(&dir)?;
    let cfg = SolveConfig { nq: 401, np: 33, ..SolveConfig::default() };
    let sol = solve_wave(&ShearProfile::still_water(1.0, 1.05, 1.0)?, &cfg)?;

    let path = dir.join("f105.wave.json");
    let checksum = write_wave(&sol, &path)?;
    let back = read_wave(&path)?;
    println!("wrote {} (sha256 {checksum})", path.display());
    println!("read back, checksum matches: {}", back.checksum == checksum);

    let ext_path = dir.join("f105.velocity.json");
    std::fs::write(&ext_path, serde_json::to_string(&external_from_solution(&sol, 129)?)?)?;
    let converted = read_wave(&ext_path)?;
    if let Some(report) = converted.conversion {
        println!("converted velocity file: {report:?}");
    }
    Ok(())
}
