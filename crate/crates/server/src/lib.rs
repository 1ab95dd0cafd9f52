//! HTTP service for group-centric video annotation.

pub mod clock;
pub mod config;
pub mod error;
pub mod events;
pub mod http;
pub mod mail;
pub mod password;
pub mod platform;
pub mod state;
pub mod store;
pub mod worker;
