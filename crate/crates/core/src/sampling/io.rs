use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CollocationPoint, SamplingError};

/// One line of a collocation snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub x: f64,
    pub t: f64,
    pub param: Option<f64>,
    pub equation_index: usize,
    pub iteration: usize,
}

/// Write points as CSV with columns `x,t,param,equation_index,iteration`
/// after a `# fboal-collocation v1` line. `param` is empty for
/// non-parameterized problems.
pub fn write_snapshot_csv<W: Write>(mut w: W, points: &[CollocationPoint], iteration: usize) -> Result<(), SamplingError> {
    writeln!(w, "# fboal-collocation v1")?;
    let mut csv = csv::Writer::from_writer(w);
    for p in points {
        csv.serialize(SnapshotRow { x: p.x, t: p.t, param: p.param, equation_index: p.equation, iteration })?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_snapshot_csv<R: Read>(r: R) -> Result<Vec<SnapshotRow>, SamplingError> {
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    Ok(csv.deserialize().collect::<Result<Vec<SnapshotRow>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let pts = vec![
            CollocationPoint { x: 0.25, t: 0.5, param: None, equation: 0 },
            CollocationPoint { x: -0.1, t: 0.0, param: Some(0.0025), equation: 1 },
        ];
        let mut buf = Vec::new();
        write_snapshot_csv(&mut buf, &pts, 2000).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# fboal-collocation v1\nx,t,param,equation_index,iteration\n0.25,0.5,,0,2000\n"));
        let rows = read_snapshot_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1], SnapshotRow { x: -0.1, t: 0.0, param: Some(0.0025), equation_index: 1, iteration: 2000 });
        assert_eq!(rows[0].param, None);
    }
}
