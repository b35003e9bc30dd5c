//! On-disk formats.
//!
//! Every structured file is JSON carrying `schema_version` and `kind`.
//! Matrices in molecule files are flat column-major arrays; matrices in
//! parameter and localization files are arrays of rows. Mode numbers in
//! files are 1-based. Samples are CSV with a `mode_1,...,mode_M` header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dynamics::LocalizationMap;
use crate::error::{Error, Result};
use crate::excitation::DriveSpec;
use crate::gaussian::CMatrix;
use crate::sampler::PhotonPattern;
use crate::vibronic::{DoktorovParams, DuschinskyData, MoleculeData};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline; floats use the shortest text that
/// parses back to the same value.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Schema(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value)?)
}

fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// Checks `schema_version` (and `kind` when the file declares one).
fn check_header(value: &Value, kind: &str, path: &Path) -> Result<()> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Schema(format!("{}: expected a JSON object", path.display())))?;
    match obj.get("schema_version").and_then(Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::Schema(format!(
                "{}: unsupported schema_version {v} (expected {SCHEMA_VERSION})",
                path.display()
            )))
        }
        None => {
            return Err(Error::Schema(format!(
                "{}: missing field `schema_version`",
                path.display()
            )))
        }
    }
    if let Some(found) = obj.get("kind") {
        if found.as_str() != Some(kind) {
            return Err(Error::Schema(format!(
                "{}: expected kind `{kind}`, found {found}",
                path.display()
            )));
        }
    }
    Ok(())
}

fn from_value<T: DeserializeOwned>(value: Value, path: &Path) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Schema(format!("{what}: rows of unequal length")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn matrix_to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn column_major(data: Vec<f64>, rows: usize, cols: usize, what: &str) -> Result<DMatrix<f64>> {
    if data.len() != rows * cols {
        return Err(Error::Schema(format!(
            "{what}: expected {rows}x{cols} = {} entries, found {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(DMatrix::from_vec(rows, cols, data))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FullMoleculeFile {
    schema_version: u32,
    #[serde(default)]
    kind: Option<String>,
    masses: Vec<f64>,
    geom_initial: Vec<f64>,
    geom_final: Vec<f64>,
    modes_initial: Vec<f64>,
    modes_final: Vec<f64>,
    freq_initial: Vec<f64>,
    freq_final: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedMoleculeFile {
    schema_version: u32,
    #[serde(default)]
    kind: Option<String>,
    duschinsky: Vec<f64>,
    displacement: Vec<f64>,
    freq_initial: Vec<f64>,
    freq_final: Vec<f64>,
}

/// Contents of a molecule file: either the full geometry and normal modes or
/// precomputed Duschinsky data (`duschinsky` column-major, `displacement` in
/// `sqrt(amu) * Angstrom`).
#[derive(Clone, Debug, PartialEq)]
pub enum MoleculeInput {
    Full(MoleculeData),
    Reduced(DuschinskyData),
}

impl MoleculeInput {
    pub fn doktorov_params(&self) -> Result<DoktorovParams> {
        match self {
            MoleculeInput::Full(mol) => crate::vibronic::doktorov_params(mol),
            MoleculeInput::Reduced(data) => crate::vibronic::doktorov_from_duschinsky(data),
        }
    }
}

pub fn read_molecule(path: &Path) -> Result<MoleculeInput> {
    let value = read_value(path)?;
    check_header(&value, "molecule", path)?;
    if value.get("duschinsky").is_some() {
        let f: ReducedMoleculeFile = from_value(value, path)?;
        let m = f.freq_initial.len();
        Ok(MoleculeInput::Reduced(DuschinskyData {
            duschinsky: column_major(f.duschinsky, m, m, "duschinsky")?,
            displacement: DVector::from_vec(f.displacement),
            freq_initial: f.freq_initial,
            freq_final: f.freq_final,
        }))
    } else {
        let f: FullMoleculeFile = from_value(value, path)?;
        let (rows, m) = (3 * f.masses.len(), f.freq_initial.len());
        Ok(MoleculeInput::Full(MoleculeData {
            modes_initial: column_major(f.modes_initial, rows, m, "modes_initial")?,
            modes_final: column_major(f.modes_final, rows, m, "modes_final")?,
            masses: f.masses,
            geom_initial: f.geom_initial,
            geom_final: f.geom_final,
            freq_initial: f.freq_initial,
            freq_final: f.freq_final,
        }))
    }
}

pub fn write_molecule(path: &Path, input: &MoleculeInput) -> Result<()> {
    let kind = Some("molecule".to_string());
    match input {
        MoleculeInput::Full(mol) => write_json(
            path,
            &FullMoleculeFile {
                schema_version: SCHEMA_VERSION,
                kind,
                masses: mol.masses.clone(),
                geom_initial: mol.geom_initial.clone(),
                geom_final: mol.geom_final.clone(),
                modes_initial: mol.modes_initial.as_slice().to_vec(),
                modes_final: mol.modes_final.as_slice().to_vec(),
                freq_initial: mol.freq_initial.clone(),
                freq_final: mol.freq_final.clone(),
            },
        ),
        MoleculeInput::Reduced(d) => write_json(
            path,
            &ReducedMoleculeFile {
                schema_version: SCHEMA_VERSION,
                kind,
                duschinsky: d.duschinsky.as_slice().to_vec(),
                displacement: d.displacement.as_slice().to_vec(),
                freq_initial: d.freq_initial.clone(),
                freq_final: d.freq_final.clone(),
            },
        ),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    schema_version: u32,
    kind: String,
    u_left: Vec<Vec<f64>>,
    sigma: Vec<f64>,
    u_right: Vec<Vec<f64>>,
    beta: Vec<f64>,
    freq_final: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest: Option<String>,
}

pub fn params_to_json(params: &DoktorovParams, manifest: Option<&str>) -> Result<Vec<u8>> {
    to_json_bytes(&ParamsFile {
        schema_version: SCHEMA_VERSION,
        kind: "doktorov_params".into(),
        u_left: matrix_to_rows(&params.u_left),
        sigma: params.sigma.clone(),
        u_right: matrix_to_rows(&params.u_right),
        beta: params.beta.clone(),
        freq_final: params.freq_final.clone(),
        manifest: manifest.map(str::to_string),
    })
}

pub fn read_params(path: &Path) -> Result<DoktorovParams> {
    let value = read_value(path)?;
    check_header(&value, "doktorov_params", path)?;
    let f: ParamsFile = from_value(value, path)?;
    let params = DoktorovParams {
        u_left: rows_to_matrix(&f.u_left, "u_left")?,
        sigma: f.sigma,
        u_right: rows_to_matrix(&f.u_right, "u_right")?,
        beta: f.beta,
        freq_final: f.freq_final,
    };
    params.validate()?;
    Ok(params)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexRows {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalizationFile {
    schema_version: u32,
    #[serde(default)]
    kind: Option<String>,
    u_local: ComplexRows,
}

/// Reads `U_l` from a localization file; frequencies come from the
/// parameter file.
pub fn read_localization(path: &Path, freq: Vec<f64>) -> Result<LocalizationMap> {
    let value = read_value(path)?;
    check_header(&value, "localization", path)?;
    let f: LocalizationFile = from_value(value, path)?;
    let re = rows_to_matrix(&f.u_local.re, "u_local.re")?;
    let im = match &f.u_local.im {
        Some(rows) => rows_to_matrix(rows, "u_local.im")?,
        None => DMatrix::zeros(re.nrows(), re.ncols()),
    };
    if im.shape() != re.shape() {
        return Err(Error::Schema("u_local: re and im shapes differ".into()));
    }
    let u = CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]));
    LocalizationMap::new(u, freq)
}

pub fn write_localization(path: &Path, u: &CMatrix) -> Result<()> {
    let re = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)].re);
    let im = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)].im);
    write_json(
        path,
        &LocalizationFile {
            schema_version: SCHEMA_VERSION,
            kind: Some("localization".into()),
            u_local: ComplexRows {
                re: matrix_to_rows(&re),
                im: Some(matrix_to_rows(&im)),
            },
        },
    )
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexVector {
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveFile {
    schema_version: u32,
    #[serde(default)]
    kind: Option<String>,
    charges: Vec<f64>,
    coeffs: Vec<Vec<[f64; 3]>>,
    field: ComplexVector,
    duration: f64,
    target_mode: usize,
}

/// Reads a drive description (`target_mode` 1-based, `coeffs` in metres,
/// `field` in V/m, `duration` in seconds).
pub fn read_drive(path: &Path) -> Result<DriveSpec> {
    let value = read_value(path)?;
    check_header(&value, "drive", path)?;
    let f: DriveFile = from_value(value, path)?;
    let im = f.field.im.unwrap_or_else(|| vec![0.0; 3]);
    if f.field.re.len() != 3 || im.len() != 3 {
        return Err(Error::Schema("field: expected three components".into()));
    }
    if f.target_mode == 0 {
        return Err(Error::Schema("target_mode: mode numbers start at 1".into()));
    }
    let spec = DriveSpec {
        charges: f.charges,
        coeffs: f.coeffs,
        field: [0, 1, 2].map(|x| C64::new(f.field.re[x], im[x])),
        duration: f.duration,
        target_mode: f.target_mode - 1,
    };
    spec.validate()?;
    Ok(spec)
}

/// CSV with header `mode_1,...,mode_M` and one integer row per sample.
pub fn samples_to_csv(num_modes: usize, samples: &[PhotonPattern]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Schema(e.to_string());
    w.write_record((1..=num_modes).map(|k| format!("mode_{k}")))
        .map_err(csv_err)?;
    for s in samples {
        if s.len() != num_modes {
            return Err(Error::mismatch("sample length", num_modes, s.len()));
        }
        w.write_record(s.iter().map(usize::to_string)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_samples(path: &Path) -> Result<Vec<PhotonPattern>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Schema(e.to_string()))?.clone();
    for (k, name) in header.iter().enumerate() {
        if name != format!("mode_{}", k + 1) {
            return Err(Error::Schema(format!(
                "{}: column {} is `{name}`, expected `mode_{}`",
                path.display(),
                k + 1,
                k + 1
            )));
        }
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
            rec.iter()
                .map(|cell| {
                    cell.parse::<usize>()
                        .map_err(|e| Error::Schema(format!("{}: bad count `{cell}`: {e}", path.display())))
                })
                .collect()
        })
        .collect()
}

/// Provenance record written next to each output as
/// `<output>.manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub schema_version: u32,
    pub kind: String,
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

impl InputRecord {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(InputRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&fs::read(path)?),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Path of the manifest that accompanies `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// File name (no directory) of the manifest for `output`, as referenced
/// from inside the output.
pub fn manifest_name(output: &Path) -> String {
    manifest_path(output)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn read_json_value(path: &Path) -> Result<Value> {
    read_value(path)
}
