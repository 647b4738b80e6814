//! Raw grid files: little-endian `f64` payload, row-major (or sensor-major
//! for traces), plus a JSON sidecar header at `<path>.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Grid, Image};
use crate::sensor::{SensorData, SensorGeometry};
use crate::Real;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageHeader {
    pub width: usize,
    pub height: usize,
    pub dx: f64,
    pub origin: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorDataHeader {
    pub num_sensors: usize,
    pub num_steps: usize,
    pub dt: f64,
    pub radius: f64,
    pub center: [f64; 2],
    pub time_origin: usize,
    #[serde(default)]
    pub periodic: bool,
}

/// Path of the JSON header that accompanies a payload file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn encode<T: Real>(values: &[T]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.f64().to_le_bytes());
    }
    bytes
}

fn decode<T: Real>(path: &Path, bytes: &[u8], expected: usize) -> Result<Vec<T>> {
    if bytes.len() != expected * 8 {
        return Err(format_error(
            path,
            format!(
                "size mismatch: header declares {expected} values ({} bytes), payload has {} bytes",
                expected * 8,
                bytes.len()
            ),
        ));
    }
    let mut out = Vec::with_capacity(expected);
    for (k, chunk) in bytes.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
        if !v.is_finite() {
            return Err(format_error(path, format!("non-finite value at index {k}")));
        }
        out.push(T::of(v));
    }
    Ok(out)
}

fn read_header<H: for<'de> Deserialize<'de>>(path: &Path) -> Result<H> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side)?;
    serde_json::from_str(&text).map_err(|e| format_error(&side, format!("malformed header: {e}")))
}

pub fn write_image<T: Real>(img: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if img.values.iter().any(|v| !v.is_finite()) {
        return Err(format_error(path, "refusing to write non-finite values"));
    }
    let header = ImageHeader {
        width: img.grid.width,
        height: img.grid.height,
        dx: img.grid.dx.f64(),
        origin: [img.grid.origin[0].f64(), img.grid.origin[1].f64()],
    };
    fs::write(path, encode(&img.values))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_image<T: Real>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let path = path.as_ref();
    let h: ImageHeader = read_header(path)?;
    let grid = Grid::new(h.width, h.height, T::of(h.dx), [T::of(h.origin[0]), T::of(h.origin[1])])
        .map_err(|e| format_error(path, e.to_string()))?;
    let values = decode(path, &fs::read(path)?, grid.len())?;
    Ok(Image { grid, values })
}

pub fn write_sensor_data<T: Real>(data: &SensorData<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    data.validate()
        .map_err(|e| format_error(path, e.to_string()))?;
    let g = &data.geometry;
    let header = SensorDataHeader {
        num_sensors: g.num_sensors,
        num_steps: data.num_steps,
        dt: data.dt.f64(),
        radius: g.radius.f64(),
        center: [g.center[0].f64(), g.center[1].f64()],
        time_origin: data.time_origin,
        periodic: data.periodic,
    };
    fs::write(path, encode(&data.traces))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_sensor_data<T: Real>(path: impl AsRef<Path>) -> Result<SensorData<T>> {
    let path = path.as_ref();
    let h: SensorDataHeader = read_header(path)?;
    let geometry = SensorGeometry::new(
        [T::of(h.center[0]), T::of(h.center[1])],
        T::of(h.radius),
        h.num_sensors,
    )
    .map_err(|e| format_error(path, e.to_string()))?;
    let traces = decode(path, &fs::read(path)?, h.num_sensors * h.num_steps)?;
    let mut data = SensorData::new(geometry, T::of(h.dt), h.num_steps, h.time_origin, traces)
        .map_err(|e| format_error(path, e.to_string()))?;
    data.periodic = h.periodic;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ramp.f64");
        let grid = Grid::new(4, 4, 0.25, [-1.0, 2.0]).unwrap();
        let img = Image::from_fn(grid, |x| x[0] + 10.0 * x[1]);
        write_image(&img, &p).unwrap();
        let back: Image = read_image(&p).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.f64");
        fs::write(&p, encode(&[1.0f64; 8])).unwrap();
        fs::write(
            sidecar_path(&p),
            r#"{"width": 3, "height": 3, "dx": 1.0, "origin": [0.0, 0.0]}"#,
        )
        .unwrap();
        let err = read_image::<f64>(&p).unwrap_err();
        assert!(err.to_string().contains("size mismatch"), "{err}");
    }

    #[test]
    fn malformed_header_and_nan_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.f64");
        fs::write(&p, encode(&[1.0f64; 4])).unwrap();
        fs::write(sidecar_path(&p), r#"{"width": 2, "height": "two"}"#).unwrap();
        assert!(read_image::<f64>(&p).is_err());

        fs::write(&p, encode(&[1.0, f64::NAN, 0.0, 0.0])).unwrap();
        fs::write(
            sidecar_path(&p),
            r#"{"width": 2, "height": 2, "dx": 1.0, "origin": [0.0, 0.0]}"#,
        )
        .unwrap();
        assert!(read_image::<f64>(&p).unwrap_err().to_string().contains("non-finite"));
    }

    #[test]
    fn sensor_data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.f64");
        let g = SensorGeometry::new([0.5, 0.5], 2.0, 5).unwrap();
        let traces = (0..35).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut data = SensorData::new(g, 0.1, 7, 3, traces).unwrap();
        data.periodic = true;
        write_sensor_data(&data, &p).unwrap();
        let back: SensorData = read_sensor_data(&p).unwrap();
        assert_eq!(back, data);
    }
}
