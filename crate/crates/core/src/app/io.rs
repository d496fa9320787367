//! Config files, CSV readers and output formatting.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};

use super::AppError;
use crate::fitkit::AngularDataset;
use crate::thermo::{CaptureTable, SpectrumPoint};

/// Flat `key = value` settings. `#` starts a comment.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    values: HashMap<String, (String, usize)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, Some(path.to_path_buf()))
    }

    pub fn parse(text: &str, path: Option<PathBuf>) -> Result<Self, AppError> {
        let name = path.as_ref().map_or("<config>".to_string(), |p| p.display().to_string());
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(AppError::Usage(format!("{name}:{}: expected `key = value`", i + 1)));
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(AppError::Usage(format!("{name}:{}: empty key", i + 1)));
            }
            values.insert(key.to_string(), (v.trim().to_string(), i + 1));
        }
        Ok(Self { path, values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, AppError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((v, line)) = self.values.get(key) else {
            return Ok(None);
        };
        v.parse().map(Some).map_err(|e| {
            let name = self.path.as_ref().map_or("<config>".to_string(), |p| p.display().to_string());
            AppError::Usage(format!("{name}:{line}: bad value for {key}: {e}"))
        })
    }
}

/// A flag value if given, else the config value, else `None`.
pub fn pick<T>(flag: Option<T>, config: &ConfigFile, key: &str) -> Result<Option<T>, AppError>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

/// Energy unit of a width token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthUnit {
    Ev,
    Kev,
    Mev,
}

impl WidthUnit {
    fn decade(self) -> i32 {
        match self {
            Self::Ev => 0,
            Self::Kev => 3,
            Self::Mev => 6,
        }
    }
}

/// A width token such as `0.1eV`, `500keV` or `2MeV`, converted to `unit`.
/// A bare number is read as MeV.
pub fn parse_width(token: &str, unit: WidthUnit) -> Result<f64, AppError> {
    let t = token.trim();
    let (num, given) = if let Some(n) = t.strip_suffix("MeV") {
        (n, WidthUnit::Mev)
    } else if let Some(n) = t.strip_suffix("keV") {
        (n, WidthUnit::Kev)
    } else if let Some(n) = t.strip_suffix("eV") {
        (n, WidthUnit::Ev)
    } else {
        (t, WidthUnit::Mev)
    };
    let malformed = || AppError::Usage(format!("malformed width {token:?}; expected e.g. 0.1eV, 5keV or 2MeV"));
    // Shift the decimal exponent rather than multiplying, so the result is
    // the correctly rounded value of the converted decimal.
    let num = num.trim();
    let (mantissa, exp) = match num.find(['e', 'E']) {
        Some(i) => (&num[..i], num[i + 1..].parse::<i32>().map_err(|_| malformed())?),
        None => (num, 0),
    };
    if mantissa.is_empty() || mantissa.contains(['e', 'E']) {
        return Err(malformed());
    }
    let shifted = exp + given.decade() - unit.decade();
    format!("{mantissa}e{shifted}").parse().map_err(|_| malformed())
}

/// `start:stop:count` in degrees.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, AppError> {
    let bad = |why: &str| AppError::Usage(format!("bad grid {text:?}: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad("expected start:stop:count"));
    };
    let start: f64 = start.trim().parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad("stop is not a number"))?;
    let count: usize = count.trim().parse().map_err(|_| bad("count is not a positive integer"))?;
    if count == 0 {
        return Err(bad("count must be at least 1"));
    }
    if !(0.0..=180.0).contains(&start) || !(0.0..=180.0).contains(&stop) || start > stop {
        return Err(bad("need 0 <= start <= stop <= 180"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
        .collect())
}

/// Checks that an input file can be opened.
pub fn check_input(path: &Path) -> Result<(), AppError> {
    std::fs::File::open(path)
        .map(|_| ())
        .map_err(|e| AppError::Data(format!("cannot open {}: {e}", path.display())))
}

/// Checks that the directory holding an output file exists.
pub fn check_output(path: &Path) -> Result<(), AppError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(AppError::Usage(format!(
            "output directory {} does not exist",
            parent.display()
        )))
    }
}

struct Table {
    path: String,
    columns: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path, required: &[&str]) -> Result<Self, AppError> {
        let name = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_path(path)
            .map_err(|e| AppError::Data(format!("cannot read {name}: {e}")))?;
        let headers = reader
            .headers()
            .map_err(|e| AppError::Data(format!("{name}: {e}")))?
            .clone();
        let columns: HashMap<String, usize> = headers.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        for col in required {
            if !columns.contains_key(*col) {
                return Err(AppError::Data(format!("{name}:1: missing column `{col}`")));
            }
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                AppError::Data(format!("{name}:{line}: {e}"))
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        if rows.is_empty() {
            return Err(AppError::Data(format!("{name}: no data rows")));
        }
        Ok(Self { path: name, columns, rows })
    }

    fn cell<'a>(&self, rec: &'a csv::StringRecord, col: &str) -> Option<&'a str> {
        self.columns
            .get(col)
            .and_then(|&i| rec.get(i))
            .filter(|s| !s.is_empty())
    }

    fn number(&self, line: u64, rec: &csv::StringRecord, col: &str) -> Result<f64, AppError> {
        let cell = self
            .cell(rec, col)
            .ok_or_else(|| AppError::Data(format!("{}:{line}: missing {col}", self.path)))?;
        self.parse(line, col, cell)
    }

    fn parse(&self, line: u64, col: &str, cell: &str) -> Result<f64, AppError> {
        cell.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| AppError::Data(format!("{}:{line}: {col} {cell:?} is not a finite number", self.path)))
    }
}

/// Reads `bin_label, theta_deg, yield[, err]` rows, grouped by label in
/// order of first appearance.
pub fn read_angular(path: &Path) -> Result<Vec<AngularDataset>, AppError> {
    let table = Table::read(path, &["bin_label", "theta_deg", "yield"])?;
    if !table.columns.contains_key("err") {
        log::warn!("{}: no err column; fitting with unit weights", table.path);
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<(f64, f64, Option<f64>)>> = HashMap::new();
    for (line, rec) in &table.rows {
        let label = table
            .cell(rec, "bin_label")
            .ok_or_else(|| AppError::Data(format!("{}:{line}: missing bin_label", table.path)))?
            .to_string();
        let theta = table.number(*line, rec, "theta_deg")?;
        let value = table.number(*line, rec, "yield")?;
        let err = match table.cell(rec, "err") {
            Some(c) => {
                let e = table.parse(*line, "err", c)?;
                if e < 0.0 {
                    return Err(AppError::Data(format!("{}:{line}: negative err {e}", table.path)));
                }
                Some(e)
            }
            None => None,
        };
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push((theta, value, err));
    }
    order
        .into_iter()
        .map(|label| {
            let rows = &groups[&label];
            let d = AngularDataset::new(label.clone(), rows).map_err(|e| AppError::Data(format!("{}: {e}", table.path)))?;
            if d.unit_weights() && table.columns.contains_key("err") {
                log::warn!("{}: bin {label} has no errors; using unit weights", table.path);
            }
            Ok(d)
        })
        .collect()
}

/// Reads `eps_mev, counts, err` rows.
pub fn read_spectrum(path: &Path) -> Result<Vec<SpectrumPoint>, AppError> {
    let table = Table::read(path, &["eps_mev", "counts"])?;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let eps = table.number(*line, rec, "eps_mev")?;
            let counts = table.number(*line, rec, "counts")?;
            let err = match table.cell(rec, "err") {
                Some(c) => table.parse(*line, "err", c)?,
                None => 0.0,
            };
            SpectrumPoint::new(eps, counts, err).map_err(|e| AppError::Data(format!("{}:{line}: {e}", table.path)))
        })
        .collect()
}

/// Reads an `eps_mev, sigma_fm2` inverse cross-section table.
pub fn read_capture_table(path: &Path) -> Result<CaptureTable, AppError> {
    let table = Table::read(path, &["eps_mev", "sigma_fm2"])?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        rows.push((table.number(*line, rec, "eps_mev")?, table.number(*line, rec, "sigma_fm2")?));
    }
    CaptureTable::new(rows).map_err(|e| AppError::Data(format!("{}: {e}", table.path)))
}

/// JSON number, or a string for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn nums(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}

/// Shortest round-trip text for `v`, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// `v` with `digits` significant digits; exponent form outside `[1e-4, 1e15)`.
pub fn significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        use WidthUnit::*;
        assert_eq!(parse_width("2MeV", Mev).unwrap(), 2.0);
        assert_eq!(parse_width("0.1eV", Ev).unwrap(), 0.1);
        assert_eq!(parse_width("0.1eV", Mev).unwrap(), 1e-7);
        assert_eq!(parse_width("500keV", Mev).unwrap(), 0.5);
        assert_eq!(parse_width("2MeV", Ev).unwrap(), 2e6);
        assert_eq!(parse_width("1e-16MeV", Mev).unwrap(), 1e-16);
        assert_eq!(parse_width("3", Mev).unwrap(), 3.0);
        assert!(parse_width("2GeV", Mev).is_err());
        assert!(parse_width("eV", Ev).is_err());
        assert!(parse_width("1e", Mev).is_err());
        assert!(parse_width("inf", Mev).is_err());
        assert_eq!(parse_width("2.5E3keV", Mev).unwrap(), 2.5);
    }

    #[test]
    fn grids() {
        let g = parse_grid("0:180:19").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[1], 10.0);
        assert_eq!(g[18], 180.0);
        assert_eq!(parse_grid("45:45:1").unwrap(), vec![45.0]);
        for bad in ["0:180", "0:200:5", "90:10:3", "0:180:0", "a:b:c"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_parsing() {
        let c = ConfigFile::parse("# comment\nA = 0.5\n\nseed=3 # trailing\n", None).unwrap();
        assert_eq!(c.get::<f64>("A").unwrap(), Some(0.5));
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(3));
        assert_eq!(c.get::<u64>("missing").unwrap(), None);
        assert!(c.get::<u64>("A").is_err());
        assert!(ConfigFile::parse("novalue\n", None).is_err());
        assert_eq!(pick(Some(1.0), &c, "A").unwrap(), Some(1.0));
        assert_eq!(pick(None, &c, "A").unwrap(), Some(0.5));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.5773502691896258, 12), "0.577350269190");
        assert_eq!(significant(1.0 / 6.0, 12), "0.166666666667");
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(-2.5, 4), "-2.500");
        assert_eq!(significant(1.5e-7, 3), "1.50e-7");
    }

    #[test]
    fn float_text_round_trips() {
        for v in [2.0844133952524015e-34, 1.5, 1e20, -3.25e-9, 0.0, 123456.789] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(2.5e-34), "2.5e-34");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn non_finite_json() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(f64::NAN), json!("nan"));
        assert_eq!(num(1.5), json!(1.5));
    }
}
