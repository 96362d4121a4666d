use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::{EncodingRules, SurveyRecord};
use crate::dataset::{Dataset, Group, Observation};
use crate::error::{Error, Result};
use crate::lattice::BinaryProfile;

fn parse_code(raw: &str, line: usize, variable: &str) -> Result<Option<i64>> {
    let s = raw.trim();
    if s.is_empty() {
        return Ok(None);
    }
    if let Ok(v) = s.parse::<i64>() {
        return Ok(Some(v));
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 => Ok(Some(v as i64)),
        _ => Err(Error::Data(format!("line {line}: {variable}: cannot parse code {s:?}"))),
    }
}

/// State codes are compared as text; numeric codes lose leading zeros and
/// trailing ".0" so "06", "6" and "6.0" agree.
fn parse_state(raw: &str) -> Option<String> {
    let s = raw.trim();
    if s.is_empty() {
        return None;
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 => Some(format!("{}", v as i64)),
        _ => Some(s.to_string()),
    }
}

fn build_record(
    line: usize,
    rules: &EncodingRules,
    field: impl Fn(&str) -> Option<String>,
) -> Result<SurveyRecord> {
    let mut record = SurveyRecord {
        line,
        state: field(&rules.state_variable).and_then(|s| parse_state(&s)),
        ..Default::default()
    };
    record.depression = match field(&rules.outcome.variable) {
        Some(s) => parse_code(&s, line, &rules.outcome.variable)?,
        None => None,
    };
    for var in rules.variables() {
        if var == rules.state_variable || var == rules.outcome.variable {
            continue;
        }
        let code = match field(&var) {
            Some(s) => parse_code(&s, line, &var)?,
            None => None,
        };
        record.items.insert(var, code);
    }
    Ok(record)
}

/// Reads a delimited file whose header row names the raw variables. Only the
/// variables the rules mention are kept; all of them must be present.
pub fn read_delimited<R: Read>(reader: R, rules: &EncodingRules, delimiter: u8) -> Result<Vec<SurveyRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut column: BTreeMap<String, usize> = BTreeMap::new();
    for var in rules.variables() {
        let idx = headers
            .iter()
            .position(|h| h.trim() == var)
            .ok_or_else(|| Error::Data(format!("line 1: column {var} not found in header")))?;
        column.insert(var, idx);
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        out.push(build_record(line, rules, |v| {
            row.get(column[v]).map(str::to_string)
        })?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedWidthField {
    pub name: String,
    /// 1-based starting column.
    pub start: usize,
    pub width: usize,
}

/// Sidecar layout for fixed-width files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedWidthLayout {
    /// Skip the first line.
    #[serde(default)]
    pub header: bool,
    pub fields: Vec<FixedWidthField>,
}

impl FixedWidthLayout {
    pub fn from_json(text: &str) -> Result<Self> {
        let layout: Self = serde_json::from_str(text)?;
        if let Some(f) = layout.fields.iter().find(|f| f.start == 0 || f.width == 0) {
            return Err(Error::InvalidConfig(format!(
                "layout field {} needs start >= 1 and width >= 1",
                f.name
            )));
        }
        Ok(layout)
    }
}

/// Reads fixed-width records; columns past the end of a short line are blank.
pub fn read_fixed_width<R: BufRead>(
    reader: R,
    layout: &FixedWidthLayout,
    rules: &EncodingRules,
) -> Result<Vec<SurveyRecord>> {
    let fields: BTreeMap<&str, &FixedWidthField> =
        layout.fields.iter().map(|f| (f.name.as_str(), f)).collect();
    if let Some(var) = rules.variables().iter().find(|v| !fields.contains_key(v.as_str())) {
        return Err(Error::Data(format!("layout has no field for {var}")));
    }
    let mut out = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i + 1;
        if (layout.header && i == 0) || text.trim().is_empty() {
            continue;
        }
        let bytes = text.as_bytes();
        let slice = |name: &str| -> Option<String> {
            let f = fields.get(name)?;
            let lo = (f.start - 1).min(bytes.len());
            let hi = (f.start - 1 + f.width).min(bytes.len());
            Some(String::from_utf8_lossy(&bytes[lo..hi]).into_owned())
        };
        out.push(build_record(line, rules, slice)?);
    }
    Ok(out)
}

/// Writes raw records as a comma-separated file with a header of variable names.
pub fn write_raw_csv<W: Write>(records: &[SurveyRecord], rules: &EncodingRules, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let item_vars: Vec<String> = rules
        .variables()
        .into_iter()
        .filter(|v| *v != rules.state_variable && *v != rules.outcome.variable)
        .collect();
    let mut header = vec![rules.state_variable.clone()];
    header.extend(item_vars.iter().cloned());
    header.push(rules.outcome.variable.clone());
    w.write_record(&header)?;
    let fmt = |c: Option<i64>| c.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        let mut row = vec![r.state.clone().unwrap_or_default()];
        row.extend(item_vars.iter().map(|v| fmt(r.code(v))));
        row.push(fmt(r.depression));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn canonical_header(dim: usize) -> Vec<String> {
    let mut h = vec!["state".to_string(), "group".to_string()];
    h.extend((1..=dim).map(|i| format!("ace_{i}")));
    h.push("depression".into());
    h
}

/// Canonical CSV: `state, group, ace_1..ace_d, depression`, indicators as 0/1.
pub fn write_canonical_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(canonical_header(data.dimension()))?;
    for obs in data.observations() {
        let mut row = vec![
            obs.state.clone().unwrap_or_default(),
            obs.group.map(|g| g.name().to_string()).unwrap_or_default(),
        ];
        row.extend(obs.profile.coords().iter().map(|&b| u8::from(b).to_string()));
        row.push(u8::from(obs.outcome).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_indicator(s: &str, line: usize, column: &str) -> Result<bool> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Data(format!("line {line}: {column}: expected 0 or 1, found {other:?}"))),
    }
}

pub fn read_canonical_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.len() < 4 {
        return Err(Error::Data("line 1: canonical header needs state, group, ace_1.., depression".into()));
    }
    let dim = headers.len() - 3;
    if headers != canonical_header(dim) {
        return Err(Error::Data(format!(
            "line 1: unexpected header {:?}, expected {:?}",
            headers,
            canonical_header(dim)
        )));
    }
    let mut data = Dataset::empty(dim)?;
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let state = Some(row[0].trim()).filter(|s| !s.is_empty()).map(String::from);
        let group = match row[1].trim() {
            "" => None,
            g => Some(
                g.parse::<Group>()
                    .map_err(|e| Error::Data(format!("line {line}: {e}")))?,
            ),
        };
        let coords = (0..dim)
            .map(|i| parse_indicator(&row[2 + i], line, &headers[2 + i]))
            .collect::<Result<Vec<bool>>>()?;
        let outcome = parse_indicator(&row[2 + dim], line, "depression")?;
        let mut obs = Observation::new(BinaryProfile::from_coords(&coords)?, outcome);
        obs.group = group;
        obs.state = state;
        data.push(obs)?;
    }
    Ok(data)
}
