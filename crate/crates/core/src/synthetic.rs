//! Seeded synthetic chart and analysis corpora for tests and demos.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::datamodel::{write_chart_csv, ChartListing, SongAnalysis, TIMBRE_DIMS};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Timbre dimensions 1 and 3 shift with the song's peak position.
    Separable,
    /// Features independent of chart success.
    Noise,
    /// Loudness rises by exactly 0.5 dB per year of first charting.
    Trend,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separable" => Ok(Scenario::Separable),
            "noise" => Ok(Scenario::Noise),
            "trend" => Ok(Scenario::Trend),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario `{other}`; expected separable, noise or trend"
            ))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Separable => "separable",
            Scenario::Noise => "noise",
            Scenario::Trend => "trend",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_songs: usize,
    pub scenario: Scenario,
    pub first_year: i32,
    pub last_year: i32,
}

impl SyntheticConfig {
    pub fn new(seed: u64, n_songs: usize, scenario: Scenario) -> Self {
        SyntheticConfig {
            seed,
            n_songs,
            scenario,
            first_year: 1985,
            last_year: 2013,
        }
    }
}

pub const DEFAULT_SONGS: usize = 697;
/// Per-segment shift of the class-dependent timbre dimensions.
pub const SEPARATION: f64 = 1.5;
pub const TREND_BASE_DB: f64 = -12.0;
pub const TREND_DB_PER_YEAR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub listings: Vec<ChartListing>,
    pub analyses: Vec<SongAnalysis>,
}

fn artist_spellings(i: usize) -> [String; 3] {
    let main = format!("Artist {:03}", i % 150);
    let guest = format!("Guest {:02}", i % 40);
    [
        format!("{main} feat. {guest}"),
        format!("{main} ft {guest}"),
        format!("{main} Featuring {guest}"),
    ]
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if config.last_year < config.first_year {
        return Err(Error::InvalidArgument("last_year precedes first_year".into()));
    }
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let span_days = (NaiveDate::from_ymd_opt(config.last_year, 12, 31).expect("valid date")
        - NaiveDate::from_ymd_opt(config.first_year, 1, 1).expect("valid date"))
    .num_days();
    let mut listings = Vec::new();
    let mut analyses = Vec::with_capacity(config.n_songs);

    for i in 0..config.n_songs {
        let mut rng = rng_for(config.seed, "synthetic-song", &[i as u64]);
        let title = format!("Song {i:04}");
        let featured = i % 17 == 0;
        let spellings = artist_spellings(i);
        let plain = format!("Artist {:03}", i % 150);

        let peak: u32 = rng.random_range(1..=40);
        let start = NaiveDate::from_ymd_opt(config.first_year, 1, 1).expect("valid date")
            + Duration::days(rng.random_range(0..=span_days - 60));
        let weeks: u32 = rng.random_range(1..=8);
        let peak_week = rng.random_range(0..weeks);
        for w in 0..weeks {
            let position = (peak + 3 * peak_week.abs_diff(w)).min(40);
            let artist = if featured { spellings[w as usize % 2].clone() } else { plain.clone() };
            listings.push(ChartListing {
                song_title: title.clone(),
                artist,
                position,
                date: start + Duration::weeks(i64::from(w)),
            });
        }

        let shift = match config.scenario {
            Scenario::Separable if peak <= 20 => SEPARATION,
            Scenario::Separable => -SEPARATION,
            _ => 0.0,
        };
        let offsets: Vec<f64> = (0..TIMBRE_DIMS).map(|_| 0.5 * unit.sample(&mut rng)).collect();
        let n_segments = rng.random_range(50..=100);
        let segments: Vec<[f64; TIMBRE_DIMS]> = (0..n_segments)
            .map(|_| {
                let mut s = [0.0; TIMBRE_DIMS];
                for (d, v) in s.iter_mut().enumerate() {
                    let class_shift = if d == 0 || d == 2 { shift } else { 0.0 };
                    *v = 10.0 * d as f64 + offsets[d] + class_shift + unit.sample(&mut rng);
                }
                s
            })
            .collect();

        let tempo = rng.random_range(100.0..140.0);
        let duration = (220.0 + 30.0 * unit.sample(&mut rng)).clamp(120.0, 400.0);
        let period = 60.0 / tempo;
        let n_beats = ((duration / period) as usize).min(300);
        let mut beats = Vec::with_capacity(n_beats);
        let mut t = rng.random_range(0.0..0.5);
        for _ in 0..n_beats {
            beats.push(t);
            t += period * (1.0 + 0.02 * unit.sample(&mut rng)).max(0.5);
        }

        let loudness = match config.scenario {
            Scenario::Trend => TREND_BASE_DB + TREND_DB_PER_YEAR * f64::from(start.year() - config.first_year),
            _ => -8.0 + 2.0 * unit.sample(&mut rng),
        };
        analyses.push(SongAnalysis {
            title,
            artist: if featured { spellings[2].clone() } else { plain },
            duration,
            tempo,
            time_signature: if rng.random_bool(0.9) { 4 } else { 3 },
            mode: i32::from(rng.random_bool(0.6)),
            key: rng.random_range(0..12),
            loudness,
            danceability: rng.random_range(0.2..1.0),
            energy: rng.random_range(0.2..1.0),
            segments,
            beats,
        });
    }
    listings.sort_by(|a, b| (a.date, a.position, &a.song_title).cmp(&(b.date, b.position, &b.song_title)));
    Ok(SyntheticCorpus { listings, analyses })
}

/// Writes `charts.csv` and `analyses/song_NNNN.json` under `dir`.
pub fn write_corpus(corpus: &SyntheticCorpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let analyses_dir = dir.join("analyses");
    std::fs::create_dir_all(&analyses_dir).map_err(|e| Error::io(&analyses_dir, e))?;
    let charts = dir.join("charts.csv");
    let file = std::fs::File::create(&charts).map_err(|e| Error::io(&charts, e))?;
    write_chart_csv(&corpus.listings, std::io::BufWriter::new(file))?;
    for (i, a) in corpus.analyses.iter().enumerate() {
        a.save(analyses_dir.join(format!("song_{i:04}.json")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::compute_peaks;

    #[test]
    fn same_seed_same_corpus() {
        let c = SyntheticConfig::new(5, 40, Scenario::Separable);
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = SyntheticConfig::new(6, 40, Scenario::Separable);
        assert_ne!(generate(&c).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn every_song_has_one_peak_record_and_analysis() {
        let corpus = generate(&SyntheticConfig::new(1, 60, Scenario::Noise)).unwrap();
        let peaks = compute_peaks(&corpus.listings);
        assert_eq!(peaks.len(), 60);
        let keys: Vec<_> = corpus.analyses.iter().map(|a| a.song_key()).collect();
        assert!(peaks.iter().all(|p| keys.contains(&p.song_key)));
        assert!(corpus.analyses.iter().all(|a| a.validate().is_ok()));
    }

    #[test]
    fn trend_loudness_is_exact() {
        let corpus = generate(&SyntheticConfig::new(2, 50, Scenario::Trend)).unwrap();
        let peaks = compute_peaks(&corpus.listings);
        for p in peaks {
            let a = corpus.analyses.iter().find(|a| a.song_key() == p.song_key).unwrap();
            let expected = TREND_BASE_DB + TREND_DB_PER_YEAR * f64::from(p.first_date.year() - 1985);
            assert_eq!(a.loudness, expected);
        }
    }
}
