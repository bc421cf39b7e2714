//! Seed-post packs: the parent posts that open each discussion thread.

use std::collections::HashSet;
use std::path::Path;

use humility_core::rct::{StanceSide, Topic};
use serde::{Deserialize, Serialize};

use crate::ExperimentError;

pub const SAMPLE_PACK_A: &str = include_str!("../assets/content/sample_pack_a.toml");
pub const SAMPLE_PACK_B: &str = include_str!("../assets/content/sample_pack_b.toml");

/// Threads opened per session.
pub const THREADS_PER_SESSION: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPost {
    pub id: String,
    /// The stance the post argues for.
    pub side: StanceSide,
    pub author: String,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentPack {
    pub name: String,
    #[serde(rename = "post")]
    pub posts: Vec<SeedPost>,
}

impl ContentPack {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let pack: ContentPack = toml::from_str(text).map_err(|e| ExperimentError::Content(e.to_string()))?;
        pack.validate()?;
        Ok(pack)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn sample() -> Self {
        Self::from_toml(SAMPLE_PACK_A).expect("bundled pack is valid")
    }

    /// Every side has enough posts to open a session's threads, and ids are unique.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut ids = HashSet::new();
        for p in &self.posts {
            if !ids.insert(p.id.as_str()) {
                return Err(ExperimentError::Content(format!("duplicate post id `{}`", p.id)));
            }
            if p.id.contains('/') || p.id.trim().is_empty() {
                return Err(ExperimentError::Content(format!("post id `{}` is not path-safe", p.id)));
            }
        }
        for side in StanceSide::ALL {
            let n = self.posts.iter().filter(|p| p.side == side).count();
            if n < THREADS_PER_SESSION {
                return Err(ExperimentError::Content(format!("side {side} has {n} posts, need {THREADS_PER_SESSION}")));
            }
        }
        Ok(())
    }

    /// The first posts arguing `side`, in pack order.
    pub fn threads_for(&self, side: StanceSide) -> Vec<&SeedPost> {
        self.posts.iter().filter(|p| p.side == side).take(THREADS_PER_SESSION).collect()
    }

    pub fn post(&self, id: &str) -> Option<&SeedPost> {
        self.posts.iter().find(|p| p.id == id)
    }

    pub fn posts_for_topic(&self, topic: Topic) -> impl Iterator<Item = &SeedPost> {
        self.posts.iter().filter(move |p| p.side.topic() == topic)
    }
}
