// SPDX-License-Identifier: MIT OR Apache-2.0

//! Great-circle distances between measuring stations.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{LabeledSquareMatrix, MatrixKind};

/// IUGG mean Earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationMetadata {
    id: String,
    lat_deg: f64,
    lon_deg: f64,
}

#[derive(Deserialize)]
struct StationRecord {
    id: String,
    lat_deg: f64,
    lon_deg: f64,
}

impl StationMetadata {
    /// Latitude in `[-90, 90]`, longitude in `(-180, 180]`.
    pub fn new(id: impl Into<String>, lat_deg: f64, lon_deg: f64) -> Result<Self> {
        let id = id.into();
        let lat_ok = (-90.0..=90.0).contains(&lat_deg);
        let lon_ok = lon_deg > -180.0 && lon_deg <= 180.0;
        if !(lat_ok && lon_ok) {
            return Err(Error::InvalidCoordinate { id, lat: lat_deg, lon: lon_deg });
        }
        Ok(Self { id, lat_deg, lon_deg })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn lat_deg(&self) -> f64 {
        self.lat_deg
    }

    pub fn lon_deg(&self) -> f64 {
        self.lon_deg
    }
}

pub fn haversine_km(a: &StationMetadata, b: &StationMetadata) -> f64 {
    let (phi1, phi2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Pairwise great-circle distances, labelled by station id.
pub fn geo_distance_matrix(stations: &[StationMetadata]) -> Result<LabeledSquareMatrix> {
    let mut seen = HashSet::new();
    if let Some(s) = stations.iter().find(|s| !seen.insert(s.id.as_str())) {
        return Err(Error::DuplicateStation(s.id.clone()));
    }
    if stations.len() < 2 {
        return Err(Error::InvalidMatrix(format!("need at least 2 stations, got {}", stations.len())));
    }
    let labels = stations.iter().map(|s| s.id.clone()).collect();
    LabeledSquareMatrix::from_pairs(labels, MatrixKind::Distance, 0.0, |i, j| {
        Ok(haversine_km(&stations[i], &stations[j]))
    })
}

/// Reads `id,lat_deg,lon_deg` rows.
pub fn read_stations<R: Read>(reader: R) -> Result<Vec<StationMetadata>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in r.deserialize::<StationRecord>() {
        let rec = rec?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateStation(rec.id));
        }
        out.push(StationMetadata::new(rec.id, rec.lat_deg, rec.lon_deg)?);
    }
    Ok(out)
}

pub fn load_stations(path: impl AsRef<Path>) -> Result<Vec<StationMetadata>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_stations(file)
}

pub fn write_stations<W: std::io::Write>(stations: &[StationMetadata], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "lat_deg", "lon_deg"])?;
    for s in stations {
        w.write_record([s.id.clone(), format!("{:?}", s.lat_deg), format!("{:?}", s.lon_deg)])?;
    }
    w.flush().map_err(|e| Error::io("<stations csv>", e))?;
    Ok(())
}
