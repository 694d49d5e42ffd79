//! Trust management under uncertainty for clustered IoT and vehicular networks.
//!
//! Nodes gather evidence about their peers. Quantitative evidence is reduced to
//! a certainty score by bootstrap resampling ([`aleatoric`]), linguistic
//! evidence by Mamdani fuzzy inference ([`fuzzy`]). A weighted mean of those
//! scores is the trust rating ([`trust`]). Ratings feed a replicated
//! rolling-average ledger ([`ledger`]) that elects cluster coordinators and
//! gates work assignment across a DAG of clusters ([`topology`], [`sim`]).

pub mod aleatoric;
pub mod error;
pub mod fuzzy;
pub mod ids;
pub mod ledger;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod streams;
pub mod taxonomy;
pub mod topology;
pub mod trust;

pub use error::{Error, Result};
pub use ids::{ClusterId, NodeId};
