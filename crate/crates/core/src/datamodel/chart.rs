use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHART_HEADER: [&str; 4] = ["title", "artist", "position", "date"];

/// One row of a weekly chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartListing {
    pub song_title: String,
    pub artist: String,
    /// 1-based chart rank.
    pub position: u32,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, Default)]
pub struct ChartParse {
    pub listings: Vec<ChartListing>,
    /// Data rows dropped because position or date did not parse.
    pub skipped: usize,
}

/// Parses an ISO `YYYY-MM-DD` date, falling back to `DD/MM/YY` with years
/// `70..=99` mapped to the 1900s and `00..=69` to the 2000s.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d);
    }
    let mut parts = s.split('/');
    let (d, m, y) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || y.len() != 2 {
        return None;
    }
    let day: u32 = d.parse().ok()?;
    let month: u32 = m.parse().ok()?;
    let yy: i32 = y.parse().ok()?;
    let year = if yy >= 70 { 1900 + yy } else { 2000 + yy };
    NaiveDate::from_ymd_opt(year, month, day)
}

/// Reads a chart CSV with header `title,artist,position,date`.
///
/// Rows whose position or date fail to parse (or whose position is zero)
/// are skipped and counted rather than aborting the whole file.
pub fn parse_chart_csv(path: impl AsRef<Path>) -> Result<ChartParse> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_chart_reader(file, path)
}

pub(crate) fn parse_chart_reader<R: std::io::Read>(reader: R, path: &Path) -> Result<ChartParse> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let found: Vec<String> = header.iter().map(|h| h.trim().to_lowercase()).collect();
    if found != CHART_HEADER {
        return Err(Error::BadHeader {
            path: path.to_path_buf(),
            expected: CHART_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut out = ChartParse::default();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed = (|| {
            let title = record.get(0)?.trim().to_string();
            let artist = record.get(1)?.trim().to_string();
            let position: u32 = record.get(2)?.trim().parse().ok().filter(|&p| p >= 1)?;
            let date = parse_date(record.get(3)?)?;
            Some(ChartListing {
                song_title: title,
                artist,
                position,
                date,
            })
        })();
        match parsed {
            Some(l) => out.listings.push(l),
            None => {
                log::warn!("{}: skipping unparseable data row {}", path.display(), line + 1);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

/// Writes listings under the standard header with ISO dates.
pub fn write_chart_csv<W: std::io::Write>(listings: &[ChartListing], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CHART_HEADER)?;
    for l in listings {
        w.write_record([
            l.song_title.as_str(),
            l.artist.as_str(),
            &l.position.to_string(),
            &l.date.format("%Y-%m-%d").to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Normalized (title, artist) identity of a song.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SongKey {
    pub title: String,
    pub artist: String,
}

impl SongKey {
    pub fn new(title: &str, artist: &str) -> Self {
        SongKey {
            title: normalize_name(title),
            artist: normalize_name(artist),
        }
    }
}

impl fmt::Display for SongKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.title, self.artist)
    }
}

/// Lowercases, collapses whitespace and rewrites every featuring marker
/// (`Featuring`, `Feat`, `Feat.`, `Ft`, `Ft.`, optionally parenthesized) to `feat`.
pub fn normalize_name(s: &str) -> String {
    let lower = s.to_lowercase();
    let tokens: Vec<String> = lower
        .split_whitespace()
        .map(|tok| {
            let open = tok.starts_with('(');
            let core = tok.trim_start_matches('(').trim_end_matches('.');
            if matches!(core, "featuring" | "feat" | "ft") {
                if open {
                    "(feat".to_string()
                } else {
                    "feat".to_string()
                }
            } else {
                tok.to_string()
            }
        })
        .collect();
    tokens.join(" ")
}

/// Best chart position reached by a song and the span of its listings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub song_key: SongKey,
    pub peak_position: u32,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

/// Collapses listings into one record per normalized song, ordered by key.
pub fn compute_peaks(listings: &[ChartListing]) -> Vec<PeakRecord> {
    let mut by_key: BTreeMap<SongKey, PeakRecord> = BTreeMap::new();
    for l in listings {
        let key = SongKey::new(&l.song_title, &l.artist);
        by_key
            .entry(key.clone())
            .and_modify(|r| {
                r.peak_position = r.peak_position.min(l.position);
                r.first_date = r.first_date.min(l.date);
                r.last_date = r.last_date.max(l.date);
            })
            .or_insert(PeakRecord {
                song_key: key,
                peak_position: l.position,
                first_date: l.date,
                last_date: l.date,
            });
    }
    by_key.into_values().collect()
}
