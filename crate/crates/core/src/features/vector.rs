use std::sync::LazyLock;

use crate::datamodel::analysis::{SongAnalysis, TIMBRE_DIMS};
use crate::error::{Error, Result};
use crate::features::stats::{descriptive_stats, STAT_SUFFIXES};

pub const BASIC_FEATURES: [&str; 8] = [
    "duration",
    "tempo",
    "time_signature",
    "mode",
    "key",
    "loudness",
    "danceability",
    "energy",
];

/// 8 track-level values, 12 timbre dimensions x 10 statistics, and 10
/// statistics of the beat-difference series.
pub const FEATURE_COUNT: usize = BASIC_FEATURES.len() + (TIMBRE_DIMS + 1) * STAT_SUFFIXES.len();

static NAMES: LazyLock<Vec<String>> = LazyLock::new(|| {
    let mut names: Vec<String> = BASIC_FEATURES.iter().map(|s| s.to_string()).collect();
    for d in 1..=TIMBRE_DIMS {
        names.extend(STAT_SUFFIXES.iter().map(|s| format!("T{d}{s}")));
    }
    names.extend(STAT_SUFFIXES.iter().map(|s| format!("Beatdiff{s}")));
    names
});

/// The fixed feature schema, in vector order.
pub fn feature_names() -> &'static [String] {
    &NAMES
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Time between consecutive beats. Needs at least two strictly increasing onsets.
pub fn beatdiff_series(beats: &[f64]) -> Result<Vec<f64>> {
    if beats.len() < 2 {
        return Err(Error::UnusableBeats(format!(
            "need at least 2 beats, got {}",
            beats.len()
        )));
    }
    beats
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let d = w[1] - w[0];
            if d > 0.0 {
                Ok(d)
            } else {
                Err(Error::UnusableBeats(format!(
                    "beat {} at {}s does not follow {}s",
                    i + 1,
                    w[1],
                    w[0]
                )))
            }
        })
        .collect()
}

pub fn feature_vector(analysis: &SongAnalysis) -> Result<FeatureVector> {
    analysis.validate()?;
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.extend([
        analysis.duration,
        analysis.tempo,
        f64::from(analysis.time_signature),
        f64::from(analysis.mode),
        f64::from(analysis.key),
        analysis.loudness,
        analysis.danceability,
        analysis.energy,
    ]);

    let mut column = Vec::with_capacity(analysis.segments.len());
    for d in 0..TIMBRE_DIMS {
        column.clear();
        column.extend(analysis.segments.iter().map(|s| s[d]));
        values.extend(descriptive_stats(&column)?.to_array());
    }
    let diffs = beatdiff_series(&analysis.beats)?;
    values.extend(descriptive_stats(&diffs)?.to_array());

    debug_assert_eq!(values.len(), FEATURE_COUNT);
    Ok(FeatureVector {
        names: NAMES.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn song(segments: Vec<[f64; 12]>, beats: Vec<f64>) -> SongAnalysis {
        SongAnalysis {
            title: "s".into(),
            artist: "a".into(),
            duration: 210.0,
            tempo: 126.0,
            time_signature: 4,
            mode: 0,
            key: 7,
            loudness: -4.2,
            danceability: 0.66,
            energy: 0.91,
            segments,
            beats,
        }
    }

    fn idx(name: &str) -> usize {
        feature_names().iter().position(|n| n == name).unwrap()
    }

    #[test]
    fn beat_differences() {
        let d = beatdiff_series(&[0.0, 0.5, 1.0, 1.6]).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(&d[..2], &[0.5, 0.5]);
        assert!((d[2] - 0.6).abs() < 1e-15);
        assert!(beatdiff_series(&[0.0, 0.5, 0.4]).is_err());
        assert!(beatdiff_series(&[1.0]).is_err());
        assert!(beatdiff_series(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn regular_beats_have_zero_variance() {
        let beats: Vec<f64> = (0..200).map(|i| i as f64 * 0.5).collect();
        let fv = feature_vector(&song(vec![[0.0; 12]], beats)).unwrap();
        assert_eq!(fv.values[idx("Beatdiffmean")], 0.5);
        assert_eq!(fv.values[idx("Beatdiffvar")], 0.0);
    }

    #[test]
    fn schema_is_fixed_and_unique() {
        assert_eq!(FEATURE_COUNT, 138);
        let names = feature_names();
        assert_eq!(names.len(), 138);
        assert_eq!(names.iter().collect::<HashSet<_>>().len(), 138);
        assert_eq!(&names[..2], &["duration".to_string(), "tempo".to_string()]);
        assert_eq!(names[8], "T1mean");
        assert_eq!(names[8 + 7 * 10 + 5], "T880perc");
        assert_eq!(names[137], "Beatdiffmedian");
        let fv = feature_vector(&song(vec![[1.0; 12]], vec![0.0, 0.4, 0.9])).unwrap();
        assert_eq!(fv.names, names);
        assert_eq!(fv.values.len(), 138);
        assert!(fv.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn identical_segments_have_no_spread() {
        let seg = [1.0, -2.0, 3.5, 0.0, 9.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 7.0];
        let fv = feature_vector(&song(vec![seg; 25], vec![0.0, 0.5, 1.0])).unwrap();
        for d in 1..=12 {
            assert_eq!(fv.values[idx(&format!("T{d}var"))], 0.0);
            assert_eq!(fv.values[idx(&format!("T{d}range"))], 0.0);
        }
        assert_eq!(fv.values[idx("T12mean")], 7.0);
    }

    #[test]
    fn single_segment() {
        let mut seg = [0.0; 12];
        seg[0] = 42.5;
        let fv = feature_vector(&song(vec![seg], vec![0.0, 0.5])).unwrap();
        assert_eq!(fv.values[idx("T1mean")], 42.5);
        assert_eq!(fv.values[idx("T1var")], 0.0);
        assert_eq!(fv.values[idx("loudness")], -4.2);
        assert_eq!(fv.values[idx("key")], 7.0);
    }

    #[test]
    fn one_beat_is_unusable() {
        let err = feature_vector(&song(vec![[0.0; 12]], vec![3.0])).unwrap_err();
        assert!(matches!(err, Error::UnusableBeats(_)));
    }
}
