//! Read-only access to published runs: the JSON API, its static bundle and
//! the HTTP server.

pub mod api;
pub mod bundle;
pub mod http;

pub use api::{respond, ApiResponse};
pub use http::{serve, SnapshotHandle};
