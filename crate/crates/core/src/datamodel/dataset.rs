use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::datamodel::analysis::SongAnalysis;
use crate::datamodel::chart::{PeakRecord, SongKey};
use crate::datamodel::labels::{label_with_gap, GapScheme, Label};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Labeled numeric instances with a fixed feature schema and a date per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
    dates: Vec<NaiveDate>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        dates: Vec<NaiveDate>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != dates.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows, {} labels, {} dates",
                rows.len(),
                labels.len(),
                dates.len()
            )));
        }
        if let Some((i, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != feature_names.len())
        {
            return Err(Error::InvalidDataset(format!(
                "row {i} has {} values, schema has {}",
                r.len(),
                feature_names.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidDataset(format!("row {i} has a non-finite value")));
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
            dates,
        })
    }

    /// Builds a dataset whose rows all carry the same placeholder date.
    pub fn undated(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let d = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
        let dates = vec![d; rows.len()];
        Self::new(feature_names, rows, labels, dates)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// `(hits, non-hits)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let hits = self.labels.iter().filter(|l| l.is_hit()).count();
        (hits, self.labels.len() - hits)
    }

    pub fn has_both_classes(&self) -> bool {
        let (h, n) = self.class_counts();
        h > 0 && n > 0
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dates: indices.iter().map(|&i| self.dates[i]).collect(),
        }
    }

    /// Keeps only the feature columns at `indices`, in that order.
    pub fn select_features(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: indices.iter().map(|&j| self.feature_names[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| indices.iter().map(|&j| r[j]).collect())
                .collect(),
            labels: self.labels.clone(),
            dates: self.dates.clone(),
        }
    }

    /// Same labels and dates with replaced feature values.
    pub fn with_rows(&self, rows: Vec<Vec<f64>>) -> Result<Dataset> {
        Dataset::new(self.feature_names.clone(), rows, self.labels.clone(), self.dates.clone())
    }

    /// Writes the feature columns followed by `label,date`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.extend(["label", "date"]);
        w.write_record(&header)?;
        for ((row, label), date) in self.rows.iter().zip(&self.labels).zip(&self.dates) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.to_string());
            rec.push(date.format("%Y-%m-%d").to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<dataset csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let n = header.len();
        if n < 2 || &header[n - 2] != "label" || &header[n - 1] != "date" {
            return Err(Error::InvalidDataset(
                "dataset CSV must end with `label,date` columns".into(),
            ));
        }
        let names: Vec<String> = header.iter().take(n - 2).map(str::to_string).collect();
        let (mut rows, mut labels, mut dates) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .take(n - 2)
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidDataset(format!("row {i}: {e}")))?;
            rows.push(row);
            labels.push(rec[n - 2].parse()?);
            dates.push(
                crate::datamodel::chart::parse_date(&rec[n - 1])
                    .ok_or_else(|| Error::InvalidDataset(format!("row {i}: bad date")))?,
            );
        }
        Dataset::new(names, rows, labels, dates)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Why songs did not make it into an assembled dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AssemblyReport {
    pub peaks: usize,
    pub excluded_by_gap: usize,
    pub missing_analysis: usize,
    pub unusable_analysis: usize,
    pub hits: usize,
    pub nonhits: usize,
}

/// Joins peak records with analyses, labels them under `scheme` and computes
/// feature vectors. Each row is dated by the song's first chart appearance.
pub fn assemble_dataset<F>(
    peaks: &[PeakRecord],
    analyses: &[SongAnalysis],
    scheme: &GapScheme,
    feature_fn: F,
) -> Result<(Dataset, AssemblyReport)>
where
    F: Fn(&SongAnalysis) -> Result<FeatureVector>,
{
    scheme.validate()?;
    let by_key: HashMap<SongKey, &SongAnalysis> = analyses.iter().map(|a| (a.song_key(), a)).collect();

    let mut report = AssemblyReport {
        peaks: peaks.len(),
        ..Default::default()
    };
    let mut names: Option<Vec<String>> = None;
    let (mut rows, mut labels, mut dates) = (Vec::new(), Vec::new(), Vec::new());

    for peak in peaks {
        let Some(label) = label_with_gap(peak.peak_position, scheme).label() else {
            report.excluded_by_gap += 1;
            continue;
        };
        let Some(analysis) = by_key.get(&peak.song_key) else {
            report.missing_analysis += 1;
            continue;
        };
        let fv = match analysis.validate().and_then(|_| feature_fn(analysis)) {
            Ok(fv) => fv,
            Err(e) => {
                log::warn!("dropping {}: {e}", peak.song_key);
                report.unusable_analysis += 1;
                continue;
            }
        };
        match &names {
            None => names = Some(fv.names.clone()),
            Some(n) if *n != fv.names => {
                return Err(Error::InvalidDataset(format!(
                    "feature schema changed at {}",
                    peak.song_key
                )))
            }
            _ => {}
        }
        match label {
            Label::Hit => report.hits += 1,
            Label::NonHit => report.nonhits += 1,
        }
        rows.push(fv.values);
        labels.push(label);
        dates.push(peak.first_date);
    }

    let Some(names) = names else {
        return Err(Error::EmptyDataset);
    };
    Ok((Dataset::new(names, rows, labels, dates)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::chart::SongKey;

    fn peak(title: &str, pos: u32) -> PeakRecord {
        let d = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        PeakRecord {
            song_key: SongKey::new(title, "x"),
            peak_position: pos,
            first_date: d,
            last_date: d,
        }
    }

    fn analysis(title: &str) -> SongAnalysis {
        SongAnalysis {
            title: title.into(),
            artist: "x".into(),
            duration: 180.0,
            tempo: 120.0,
            time_signature: 4,
            mode: 1,
            key: 0,
            loudness: -5.0,
            danceability: 0.5,
            energy: 0.5,
            segments: vec![[1.0; 12]],
            beats: vec![0.0, 0.5, 1.0],
        }
    }

    fn fake_features(a: &SongAnalysis) -> Result<FeatureVector> {
        Ok(FeatureVector {
            names: vec!["tempo".into()],
            values: vec![a.tempo],
        })
    }

    #[test]
    fn gap_and_missing_drops() {
        let peaks = vec![peak("a", 1), peak("b", 15), peak("c", 34), peak("d", 2)];
        let analyses = vec![analysis("a"), analysis("b"), analysis("c")];
        let (ds, rep) = assemble_dataset(&peaks, &analyses, &GapScheme::D1, fake_features).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), &[Label::Hit, Label::NonHit]);
        assert_eq!(rep.excluded_by_gap, 1);
        assert_eq!(rep.missing_analysis, 1);
    }

    #[test]
    fn unusable_analysis_is_dropped() {
        let mut bad = analysis("a");
        bad.beats = vec![1.0];
        let peaks = vec![peak("a", 1), peak("c", 34)];
        let (ds, rep) = assemble_dataset(
            &peaks,
            &[bad, analysis("c")],
            &GapScheme::D1,
            crate::features::feature_vector,
        )
        .unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(rep.unusable_analysis, 1);
    }

    #[test]
    fn empty_result_is_error() {
        let peaks = vec![peak("b", 15)];
        assert!(matches!(
            assemble_dataset(&peaks, &[analysis("b")], &GapScheme::D1, fake_features),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(Dataset::undated(names.clone(), vec![vec![1.0]], vec![Label::Hit]).is_err());
        assert!(Dataset::undated(names.clone(), vec![vec![1.0, f64::NAN]], vec![Label::Hit]).is_err());
        assert!(Dataset::undated(names, vec![vec![1.0, 2.0]], vec![]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::new(
            vec!["x".into(), "y".into()],
            vec![vec![0.1, -2.5e-7], vec![3.0, 1.0 / 3.0]],
            vec![Label::Hit, Label::NonHit],
            vec![
                NaiveDate::from_ymd_opt(2010, 5, 1).unwrap(),
                NaiveDate::from_ymd_opt(2011, 6, 2).unwrap(),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,label,date\n"));
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), ds);
    }
}
