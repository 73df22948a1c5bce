use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use flate2::write::GzEncoder;
use flate2::Compression;

use super::engine::TrajectorySample;
use crate::error::Result;
use crate::scalar::Scalar;

/// Writes `tau,site,phi,phibar` rows for every sample and site.
pub fn write_trajectory_csv<T: Scalar, W: Write>(samples: &[TrajectorySample<T>], mut out: W) -> Result<()> {
    writeln!(out, "tau,site,phi,phibar")?;
    for s in samples {
        for (site, (phi, bar)) in s.phi.iter().zip(&s.phibar).enumerate() {
            writeln!(out, "{},{site},{},{}", s.tau.as_f64(), phi.as_f64(), bar.as_f64())?;
        }
    }
    Ok(())
}

/// Saves a trajectory, gzip-compressed when the file name ends in `.gz`.
pub fn save_trajectory<T: Scalar>(samples: &[TrajectorySample<T>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "gz") {
        let mut gz = GzEncoder::new(file, Compression::default());
        write_trajectory_csv(samples, &mut gz)?;
        gz.finish()?.flush()?;
    } else {
        let mut file = file;
        write_trajectory_csv(samples, &mut file)?;
        file.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::read::GzDecoder;
    use std::io::Read;

    fn samples() -> Vec<TrajectorySample<f64>> {
        vec![
            TrajectorySample {
                tau: 0.5,
                phi: vec![0.25, -1.0],
                phibar: vec![0.125, -0.5],
            },
            TrajectorySample {
                tau: 1.0,
                phi: vec![0.0, 2.0],
                phibar: vec![0.0, 1.5],
            },
        ]
    }

    const EXPECTED: &str = "tau,site,phi,phibar\n0.5,0,0.25,0.125\n0.5,1,-1,-0.5\n1,0,0,0\n1,1,2,1.5\n";

    #[test]
    fn plain_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        save_trajectory(&samples(), &path).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), EXPECTED);
    }

    #[test]
    fn gzip_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv.gz");
        save_trajectory(&samples(), &path).unwrap();
        let mut text = String::new();
        GzDecoder::new(File::open(path).unwrap()).read_to_string(&mut text).unwrap();
        assert_eq!(text, EXPECTED);
    }
}
