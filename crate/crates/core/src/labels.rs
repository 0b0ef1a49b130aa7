//! Label spaces for the two tasks: single-label genre and multi-label framing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// News genre of an article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Satire,
    Reporting,
    Opinion,
}

impl Genre {
    pub const ALL: [Genre; 3] = [Genre::Satire, Genre::Reporting, Genre::Opinion];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Genre> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Genre::Satire => "satire",
            Genre::Reporting => "reporting",
            Genre::Opinion => "opinion",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Genre {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown genre label {s:?}"))
    }
}

/// The fourteen framing dimensions, in canonical (alphabetical) order.
pub const FRAME_NAMES: [&str; 14] = [
    "Capacity_and_resources",
    "Crime_and_punishment",
    "Cultural_identity",
    "Economic",
    "External_regulation_and_reputation",
    "Fairness_and_equality",
    "Health_and_safety",
    "Legality_Constitutionality_and_jurisprudence",
    "Morality",
    "Policy_prescription_and_evaluation",
    "Political",
    "Public_opinion",
    "Quality_of_life",
    "Security_and_defense",
];

pub const NUM_FRAMES: usize = FRAME_NAMES.len();
pub const NUM_GENRES: usize = 3;

/// Index of a frame name. Accepts the underscore form used in files as well
/// as the spaced/comma form ("Legality, constitutionality and jurisprudence"),
/// compared case-insensitively.
pub fn frame_index(name: &str) -> Option<usize> {
    let norm = normalize_frame(name);
    FRAME_NAMES.iter().position(|f| normalize_frame(f) == norm)
}

fn normalize_frame(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// A set of frames stored as a 14-bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FrameSet(u16);

impl FrameSet {
    pub fn empty() -> Self {
        FrameSet(0)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = FrameSet(0);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < NUM_FRAMES, "frame index {i} out of range");
        self.0 |= 1 << i;
    }

    pub fn contains(&self, i: usize) -> bool {
        i < NUM_FRAMES && self.0 & (1 << i) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_FRAMES).filter(move |&i| self.contains(i))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.iter().map(|i| FRAME_NAMES[i]).collect()
    }

    pub fn indicator(&self) -> Vec<bool> {
        (0..NUM_FRAMES).map(|i| self.contains(i)).collect()
    }

    pub fn parse_names<S: AsRef<str>>(names: &[S]) -> std::result::Result<Self, String> {
        let mut s = FrameSet::empty();
        for n in names {
            let n = n.as_ref();
            let i = frame_index(n).ok_or_else(|| format!("unknown frame label {n:?}"))?;
            s.insert(i);
        }
        Ok(s)
    }
}

/// The two classification tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Genre,
    Frames,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Genre, Task::Frames];

    pub fn name(self) -> &'static str {
        match self {
            Task::Genre => "genre",
            Task::Frames => "frames",
        }
    }

    pub fn spec(self) -> TaskSpec {
        match self {
            Task::Genre => TaskSpec {
                task: self,
                kind: TaskKind::SingleLabel,
                classes: Genre::ALL.iter().map(|g| g.name().to_string()).collect(),
            },
            Task::Frames => TaskSpec {
                task: self,
                kind: TaskKind::MultiLabel,
                classes: FRAME_NAMES.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            Task::Genre => NUM_GENRES,
            Task::Frames => NUM_FRAMES,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genre" | "subtask1" => Ok(Task::Genre),
            "frames" | "subtask2" => Ok(Task::Frames),
            _ => Err(Error::Config(format!("unknown task {s:?} (expected genre or frames)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    SingleLabel,
    MultiLabel,
}

/// Declares a task's label space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: Task,
    pub kind: TaskKind,
    pub classes: Vec<String>,
}

impl TaskSpec {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_names_parse_in_either_form() {
        assert_eq!(frame_index("Legality, constitutionality and jurisprudence"), Some(7));
        assert_eq!(frame_index("Security_and_defense"), Some(13));
        assert_eq!(frame_index("security and defense"), Some(13));
        assert_eq!(frame_index("Sports"), None);
    }

    #[test]
    fn genre_round_trips_through_str() {
        for g in Genre::ALL {
            assert_eq!(g.name().parse::<Genre>().unwrap(), g);
        }
        assert!("sarcasm".parse::<Genre>().is_err());
    }

    #[test]
    fn frameset_ops() {
        let s = FrameSet::from_indices([0, 3, 13]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(13));
        assert!(!s.contains(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 13]);
        assert!(FrameSet::empty().is_empty());
    }
}
