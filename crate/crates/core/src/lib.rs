//! Source-side media sealing.
//!
//! The pipeline has three stages. A [`scene::SceneCapture`] holds a
//! synchronized multisensory recording (luminance, depth, thermal, audio,
//! gyro). [`scoring`] turns it into per-dimension credibility scores and an
//! overall realism score. [`sealing`] binds the frame-0 image and a
//! [`manifest::RealismManifest`] carrying those scores with an Ed25519
//! signature, and verifies sealed bundles against a device [`registry`].
//!
//! Sensor data is synthetic: [`scene`] generates genuine scenes as well as
//! analog-hole attacks (a filmed screen, a photographed printout).

pub mod cli;
pub mod identity;
pub mod manifest;
pub mod registry;
pub mod scene;
pub mod scoring;
pub mod sealing;

pub use identity::{DeviceId, Location};
pub use manifest::RealismManifest;
pub use registry::Registry;
pub use scene::SceneCapture;
pub use scoring::{DimensionScores, OverallScore, ScoringParams};
pub use sealing::{DeviceKeyPair, SealedBundle, Verdict, VerificationReport};
