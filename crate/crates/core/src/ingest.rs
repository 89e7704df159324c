//! Dataset readers and writers.
//!
//! Two on-disk formats are supported:
//!
//! * preprocessed CSV: `user,class,<feature>...`, one row per instance;
//! * raw-stream CSV: `timestamp,user,class,ax,ay,az`, one file per sensor,
//!   turned into instances through windowing and [`features::extract_features`].
//!
//! Rows with a missing value (empty, `NA`, `NaN`, `null` or non-finite) are
//! dropped. After that, users with fewer than [`MIN_PER_USER_CLASS`] instances
//! of any class they performed are removed.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Matrix, MultiUserDataset};
use crate::error::{Error, Result};
use crate::features::{extract_features, windowize, StreamSample, FEATURE_NAMES, N_FEATURES};

pub const MIN_PER_USER_CLASS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IngestFormat {
    Preprocessed,
    RawStream,
}

impl fmt::Display for IngestFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IngestFormat::Preprocessed => "preprocessed",
            IngestFormat::RawStream => "raw-stream",
        })
    }
}

impl FromStr for IngestFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "preprocessed" => Ok(IngestFormat::Preprocessed),
            "raw-stream" | "raw_stream" | "raw" => Ok(IngestFormat::RawStream),
            other => Err(Error::Parse(format!("unknown dataset format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    /// Samples per non-overlapping window (raw streams only).
    pub window_len: usize,
    /// Moving-average width applied inside each window (raw streams only).
    pub filter_width: usize,
    pub min_per_user_class: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            window_len: 150,
            filter_width: 10,
            min_per_user_class: MIN_PER_USER_CLASS,
        }
    }
}

/// Reads the given files and applies the missing-value and per-user filters.
/// Preprocessed input takes exactly one path; raw streams take one per sensor.
pub fn ingest<P: AsRef<Path>>(paths: &[P], format: IngestFormat, options: &IngestOptions) -> Result<MultiUserDataset> {
    let data = match format {
        IngestFormat::Preprocessed => {
            if paths.len() != 1 {
                return Err(Error::InvalidParameter(format!(
                    "preprocessed input takes one file, got {}",
                    paths.len()
                )));
            }
            read_preprocessed(File::open(paths[0].as_ref())?)?
        }
        IngestFormat::RawStream => {
            let streams = paths
                .iter()
                .map(|p| read_stream(File::open(p.as_ref())?))
                .collect::<Result<Vec<_>>>()?;
            stream_dataset(&streams, options)?
        }
    };
    let before = (data.n_users(), data.n_rows());
    let data = data.filter_min_per_user_class(options.min_per_user_class)?;
    log::info!(
        "ingested {} rows from {} users ({} rows, {} users before filtering)",
        data.n_rows(),
        data.n_users(),
        before.1,
        before.0
    );
    Ok(data)
}

fn parse_value(field: &str) -> Result<Option<f64>> {
    let t = field.trim();
    if t.is_empty() || ["na", "nan", "null"].contains(&t.to_ascii_lowercase().as_str()) {
        return Ok(None);
    }
    let v: f64 = t.parse().map_err(|_| Error::Parse(format!("`{t}` is not a number")))?;
    Ok(v.is_finite().then_some(v))
}

fn intern(vocab: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> usize {
    *index.entry(name.to_string()).or_insert_with(|| {
        vocab.push(name.to_string());
        vocab.len() - 1
    })
}

/// Parses a preprocessed CSV without the per-user filter. User and class
/// vocabularies follow order of first appearance.
pub fn read_preprocessed<R: Read>(reader: R) -> Result<MultiUserDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "user" || &header[1] != "class" {
        return Err(Error::Parse("expected header `user,class,<features>...`".into()));
    }
    let feature_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut features = Matrix::with_cols(feature_names.len());
    let (mut labels, mut users) = (Vec::new(), Vec::new());
    let (mut class_names, mut user_names) = (Vec::new(), Vec::new());
    let (mut class_index, mut user_index) = (HashMap::new(), HashMap::new());
    let mut dropped = 0usize;
    let mut row = Vec::with_capacity(feature_names.len());
    for rec in rdr.records() {
        let rec = rec?;
        let (user, class) = (rec[0].trim(), rec[1].trim());
        row.clear();
        let mut complete = !user.is_empty() && !class.is_empty();
        for field in rec.iter().skip(2) {
            match parse_value(field)? {
                Some(v) => row.push(v),
                None => complete = false,
            }
        }
        if !complete {
            dropped += 1;
            continue;
        }
        features.push_row(&row)?;
        users.push(intern(&mut user_names, &mut user_index, user));
        labels.push(intern(&mut class_names, &mut class_index, class));
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    if labels.is_empty() {
        return Err(Error::InvalidDataset("no complete rows".into()));
    }
    MultiUserDataset::new(features, labels, users, class_names, user_names, feature_names)
}

pub fn write_preprocessed<W: Write>(data: &MultiUserDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["user".to_string(), "class".to_string()];
    header.extend(data.feature_names().iter().cloned());
    wtr.write_record(&header)?;
    let mut fields = Vec::with_capacity(header.len());
    for i in 0..data.n_rows() {
        fields.clear();
        fields.push(data.user_names()[data.users()[i]].clone());
        fields.push(data.class_names()[data.labels()[i]].clone());
        fields.extend(data.features().row(i).iter().map(|v| v.to_string()));
        wtr.write_record(&fields)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Parses one sensor's raw stream, dropping incomplete rows.
pub fn read_stream<R: Read>(reader: R) -> Result<Vec<StreamSample>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = ["timestamp", "user", "class", "ax", "ay", "az"];
    if header.len() != 6 || header.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Parse(format!("expected header `{}`", expected.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (user, class) = (rec[1].trim(), rec[2].trim());
        let values = [&rec[0], &rec[3], &rec[4], &rec[5]]
            .iter()
            .map(|f| parse_value(f))
            .collect::<Result<Vec<_>>>()?;
        if user.is_empty() || class.is_empty() || values.iter().any(Option::is_none) {
            continue;
        }
        let v: Vec<f64> = values.into_iter().flatten().collect();
        out.push(StreamSample {
            timestamp: v[0],
            user: user.to_string(),
            class: class.to_string(),
            acc: [v[1], v[2], v[3]],
        });
    }
    Ok(out)
}

/// Keeps the samples of the first sensor whose `(user, timestamp)` occurs in
/// every other sensor with the same class, and returns all sensors aligned to
/// that sequence.
fn join_sensors(streams: &[Vec<StreamSample>]) -> Vec<Vec<StreamSample>> {
    let lookups: Vec<HashMap<(&str, u64), &StreamSample>> = streams[1..]
        .iter()
        .map(|s| {
            s.iter()
                .map(|x| ((x.user.as_str(), x.timestamp.to_bits()), x))
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new(); streams.len()];
    for s in &streams[0] {
        let key = (s.user.as_str(), s.timestamp.to_bits());
        let partners: Option<Vec<&StreamSample>> = lookups
            .iter()
            .map(|l| l.get(&key).copied().filter(|p| p.class == s.class))
            .collect();
        if let Some(partners) = partners {
            out[0].push(s.clone());
            for (i, p) in partners.into_iter().enumerate() {
                out[i + 1].push(p.clone());
            }
        }
    }
    out
}

/// Feature names for `n_sensors` concatenated 16-vectors.
pub fn stream_feature_names(n_sensors: usize) -> Vec<String> {
    if n_sensors == 1 {
        return FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    }
    (0..n_sensors)
        .flat_map(|s| FEATURE_NAMES.iter().map(move |f| format!("s{s}_{f}")))
        .collect()
}

/// Windows each user's (joined) stream and extracts one feature row per
/// window, concatenating sensors in input order. No per-user filter.
pub fn stream_dataset(streams: &[Vec<StreamSample>], options: &IngestOptions) -> Result<MultiUserDataset> {
    if streams.is_empty() {
        return Err(Error::Empty("sensor streams"));
    }
    if options.window_len < 2 {
        return Err(Error::InvalidParameter("window length must be at least 2".into()));
    }
    let joined = join_sensors(streams);

    let mut user_order: Vec<&str> = Vec::new();
    let mut seen = HashSet::new();
    for s in &joined[0] {
        if seen.insert(s.user.as_str()) {
            user_order.push(s.user.as_str());
        }
    }
    // windows[sensor] in user order, then stream order within the user
    let mut windows = vec![Vec::new(); joined.len()];
    for user in &user_order {
        for (sensor, stream) in joined.iter().enumerate() {
            let own: Vec<StreamSample> = stream.iter().filter(|s| s.user == *user).cloned().collect();
            windows[sensor].extend(windowize(&own, options.window_len));
        }
    }

    let n_sensors = joined.len();
    let rows: Vec<Vec<f64>> = (0..windows[0].len())
        .into_par_iter()
        .map(|w| {
            let mut row = Vec::with_capacity(n_sensors * N_FEATURES);
            for sensor in &windows {
                let smooth = sensor[w].smoothed(options.filter_width)?;
                row.extend(extract_features(&smooth)?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::InvalidDataset("no complete windows in stream".into()));
    }

    let mut features = Matrix::with_cols(n_sensors * N_FEATURES);
    let (mut labels, mut users) = (Vec::new(), Vec::new());
    let (mut class_names, mut user_names) = (Vec::new(), Vec::new());
    let (mut class_index, mut user_index) = (HashMap::new(), HashMap::new());
    for (row, w) in rows.iter().zip(&windows[0]) {
        features.push_row(row)?;
        users.push(intern(&mut user_names, &mut user_index, &w.user));
        labels.push(intern(&mut class_names, &mut class_index, &w.class));
    }
    MultiUserDataset::new(
        features,
        labels,
        users,
        class_names,
        user_names,
        stream_feature_names(n_sensors),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn synthetic_round_trip() {
        let cfg = SynthConfig {
            user_shift: 1.0,
            seed: 3,
            ..SynthConfig::default()
        };
        let data = generate(&cfg).unwrap();
        let mut buf = Vec::new();
        write_preprocessed(&data, &mut buf).unwrap();
        assert_eq!(read_preprocessed(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn missing_values_are_dropped() {
        let text = "user,class,a,b\nu1,A,1,2\nu1,A,,3\nu1,B,NA,1\nu2,A,nan,1\nu2,B,4,5\n,A,1,1\n";
        let d = read_preprocessed(text.as_bytes()).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.user_names(), ["u1", "u2"]);
        assert_eq!(d.class_names(), ["A", "B"]);
        assert_eq!(d.features().row(1), [4.0, 5.0]);
    }

    #[test]
    fn bad_number_is_a_parse_error() {
        assert!(read_preprocessed("user,class,a\nu,A,abc\n".as_bytes()).is_err());
        assert!(read_preprocessed("who,class,a\nu,A,1\n".as_bytes()).is_err());
    }

    #[test]
    fn user_with_four_rows_of_a_class_is_removed() {
        let mut text = String::from("user,class,x\n");
        for (user, class, n) in [("keep", "A", 5), ("keep", "B", 6), ("drop", "A", 4), ("drop", "B", 9)] {
            for i in 0..n {
                text.push_str(&format!("{user},{class},{i}\n"));
            }
        }
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        let d = ingest(&[file.path()], IngestFormat::Preprocessed, &IngestOptions::default()).unwrap();
        assert_eq!(d.user_names(), ["keep"]);
        assert_eq!(d.n_rows(), 11);
    }

    #[test]
    fn nobody_survives() {
        let text = "user,class,x\nu,A,1\nu,A,2\n";
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        assert!(ingest(&[file.path()], IngestFormat::Preprocessed, &IngestOptions::default()).is_err());
    }

    fn stream_csv(users: &[&str], classes: &[&str], per: usize, phase: f64) -> String {
        let mut s = String::from("timestamp,user,class,ax,ay,az\n");
        let mut t = 0;
        for u in users {
            for c in classes {
                for _ in 0..per {
                    let x = t as f64 * 0.1 + phase;
                    s.push_str(&format!(
                        "{t},{u},{c},{},{},{}\n",
                        x.sin(),
                        x.cos(),
                        9.8 + 0.1 * x.sin()
                    ));
                    t += 1;
                }
            }
        }
        s
    }

    #[test]
    fn two_sensor_stream_gives_32_columns() {
        let opts = IngestOptions {
            window_len: 20,
            filter_width: 3,
            ..IngestOptions::default()
        };
        let a = read_stream(stream_csv(&["u1", "u2"], &["walk", "sit"], 100, 0.0).as_bytes()).unwrap();
        let b = read_stream(stream_csv(&["u1", "u2"], &["walk", "sit"], 100, 0.5).as_bytes()).unwrap();
        let d = stream_dataset(&[a.clone(), b], &opts).unwrap();
        assert_eq!(d.n_features(), 32);
        assert_eq!(d.feature_names()[16], "s1_mean_x");
        assert_eq!(d.n_rows(), 2 * 2 * 5);
        let single = stream_dataset(&[a], &opts).unwrap();
        assert_eq!(single.n_features(), 16);
        assert_eq!(single.feature_names()[0], "mean_x");
        // first sensor block is identical with or without a partner sensor
        assert_eq!(&d.features().row(3)[..16], single.features().row(3));
    }

    #[test]
    fn join_drops_unmatched_timestamps() {
        let a = read_stream(stream_csv(&["u1"], &["walk"], 40, 0.0).as_bytes()).unwrap();
        let mut b = a.clone();
        b.remove(5);
        let joined = join_sensors(&[a, b]);
        assert_eq!(joined[0].len(), 39);
        assert_eq!(joined[1].len(), 39);
        assert!(joined[0]
            .iter()
            .zip(&joined[1])
            .all(|(x, y)| x.timestamp == y.timestamp));
    }

    #[test]
    fn stream_rows_with_gaps_are_skipped() {
        let text = "timestamp,user,class,ax,ay,az\n0,u,A,1,2,3\n1,u,A,,2,3\n2,u,A,1,2,NaN\n";
        assert_eq!(read_stream(text.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn format_names() {
        assert_eq!("raw-stream".parse::<IngestFormat>().unwrap(), IngestFormat::RawStream);
        assert_eq!(IngestFormat::Preprocessed.to_string(), "preprocessed");
        assert!("xml".parse::<IngestFormat>().is_err());
    }
}
