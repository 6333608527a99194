use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datamodel::chart::SongKey;
use crate::error::{Error, Result};

pub const TIMBRE_DIMS: usize = 12;

/// Track-level descriptors plus the per-segment timbre matrix and beat grid
/// of one song, as delivered by an upstream audio analyzer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongAnalysis {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub artist: String,
    /// Seconds.
    pub duration: f64,
    /// Beats per minute.
    pub tempo: f64,
    pub time_signature: i32,
    /// 0 minor, 1 major.
    pub mode: i32,
    /// Pitch class 0-11.
    pub key: i32,
    /// Decibels.
    pub loudness: f64,
    pub danceability: f64,
    pub energy: f64,
    pub segments: Vec<[f64; TIMBRE_DIMS]>,
    /// Beat onsets in seconds.
    pub beats: Vec<f64>,
}

impl SongAnalysis {
    pub fn song_key(&self) -> SongKey {
        SongKey::new(&self.title, &self.artist)
    }

    /// Checks the track-level invariants. Beat monotonicity is checked when
    /// the beat-difference series is built.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidAnalysis(msg));
        let track = [
            self.duration,
            self.tempo,
            self.loudness,
            self.danceability,
            self.energy,
        ];
        if track.iter().any(|v| !v.is_finite()) {
            return bad("non-finite track-level field".into());
        }
        if self.duration <= 0.0 {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.tempo <= 0.0 {
            return bad(format!("tempo must be positive, got {}", self.tempo));
        }
        if !matches!(self.mode, 0 | 1) {
            return bad(format!("mode must be 0 or 1, got {}", self.mode));
        }
        if !(0..=11).contains(&self.key) {
            return bad(format!("key must be in 0..=11, got {}", self.key));
        }
        if self.time_signature < 1 {
            return bad(format!("time signature must be >= 1, got {}", self.time_signature));
        }
        if self.segments.is_empty() {
            return bad("no timbre segments".into());
        }
        if self.segments.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite timbre value".into());
        }
        if self.beats.iter().any(|v| !v.is_finite()) {
            return bad("non-finite beat time".into());
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Loads every `*.json` file in `dir`, sorted by file name.
pub fn load_analyses_dir(dir: impl AsRef<Path>) -> Result<Vec<SongAnalysis>> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        if p.extension().is_some_and(|e| e == "json") {
            paths.push(p);
        }
    }
    paths.sort();
    paths.iter().map(SongAnalysis::load).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal() -> SongAnalysis {
        SongAnalysis {
            title: "t".into(),
            artist: "a".into(),
            duration: 200.0,
            tempo: 128.0,
            time_signature: 4,
            mode: 1,
            key: 5,
            loudness: -6.0,
            danceability: 0.7,
            energy: 0.8,
            segments: vec![[0.0; TIMBRE_DIMS]],
            beats: vec![0.0, 0.5],
        }
    }

    #[test]
    fn json_round_trip() {
        let a = minimal();
        let back = SongAnalysis::from_json_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn segment_width_enforced_by_schema() {
        let json = r#"{"duration":1,"tempo":1,"time_signature":4,"mode":0,"key":0,
            "loudness":-1,"danceability":0.5,"energy":0.5,"segments":[[1,2,3]],"beats":[0,1]}"#;
        assert!(SongAnalysis::from_json_str(json).is_err());
    }

    #[test]
    fn validation_catches_bad_fields() {
        minimal().validate().unwrap();
        let mut a = minimal();
        a.tempo = 0.0;
        assert!(a.validate().is_err());
        let mut a = minimal();
        a.key = 12;
        assert!(a.validate().is_err());
        let mut a = minimal();
        a.segments.clear();
        assert!(a.validate().is_err());
    }
}
