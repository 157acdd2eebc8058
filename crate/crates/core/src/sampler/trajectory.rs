use std::io::{self, Write};

use super::Sample;

pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_COLUMNS: [&str; 5] =
    ["sweep", "potential_energy", "volume", "displacement_acceptance", "volume_acceptance"];

/// Streams samples as CSV with a `#`-prefixed provenance header.
pub struct TrajectoryWriter<W: Write> {
    out: W,
}

impl<W: Write> TrajectoryWriter<W> {
    /// Writes the provenance lines (each prefixed with `# `), the schema
    /// version and the column header.
    pub fn new(mut out: W, provenance: &[String]) -> io::Result<Self> {
        for line in provenance {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# schema_version: {TRAJECTORY_SCHEMA_VERSION}")?;
        writeln!(out, "{}", TRAJECTORY_COLUMNS.join(","))?;
        Ok(TrajectoryWriter { out })
    }

    pub fn write(&mut self, s: &Sample) -> io::Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{}",
            s.sweep, s.potential_energy, s.volume, s.displacement_acceptance, s.volume_acceptance
        )
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_rows() {
        let mut w = TrajectoryWriter::new(Vec::new(), &["seed: 7".into()]).unwrap();
        w.write(&Sample {
            sweep: 10,
            potential_energy: -3.5,
            volume: 42.0,
            displacement_acceptance: 0.4,
            volume_acceptance: 0.25,
        })
        .unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed: 7");
        assert_eq!(lines[2], TRAJECTORY_COLUMNS.join(","));
        assert_eq!(lines[3], "10,-3.5,42,0.4,0.25");
    }
}
