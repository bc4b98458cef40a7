//! Per-run counters and their reporting forms.

use crate::config::Scheme;
use crate::routing::{FlowOutcome, RouteOutcome};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("success rate is undefined for a run with no accounted flows")]
    NoFlows,
    #[error(
        "flow accounting out of balance: {flows_total} flows vs \
         {delivered_authentic} + {delivered_compromised} + {dropped} outcomes"
    )]
    Unbalanced {
        flows_total: u64,
        delivered_authentic: u64,
        delivered_compromised: u64,
        dropped: u64,
    },
}

/// Everything a single run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub n_nodes: u32,
    pub seed: u64,
    pub flows_total: u64,
    pub delivered_authentic: u64,
    pub delivered_compromised: u64,
    pub dropped: u64,
    pub data_transmissions: u64,
    pub control_messages: u64,
    pub consensus_messages: u64,
}

impl MetricsReport {
    pub fn empty(scheme: Scheme, n_nodes: u32, seed: u64) -> MetricsReport {
        MetricsReport {
            scheme,
            n_nodes,
            seed,
            flows_total: 0,
            delivered_authentic: 0,
            delivered_compromised: 0,
            dropped: 0,
            data_transmissions: 0,
            control_messages: 0,
            consensus_messages: 0,
        }
    }

    /// Folds one routed flow into the counters.
    pub fn record(&mut self, route: &RouteOutcome) {
        self.flows_total += 1;
        match route.outcome {
            FlowOutcome::Delivered => self.delivered_authentic += 1,
            FlowOutcome::DeliveredCompromised => self.delivered_compromised += 1,
            FlowOutcome::Dropped => self.dropped += 1,
        }
        self.data_transmissions += route.data_transmissions;
        self.control_messages += route.control_messages;
    }

    /// Percentage of accounted flows delivered intact. Compromised
    /// deliveries count against it.
    pub fn success_rate(&self) -> Result<f64, MetricsError> {
        if self.flows_total == 0 {
            return Err(MetricsError::NoFlows);
        }
        Ok(100.0 * self.delivered_authentic as f64 / self.flows_total as f64)
    }

    pub fn total_messages(&self) -> u64 {
        self.data_transmissions + self.control_messages + self.consensus_messages
    }

    /// Every accounted flow must land in exactly one outcome bucket.
    pub fn check_conservation(&self) -> Result<(), MetricsError> {
        let outcomes = self.delivered_authentic + self.delivered_compromised + self.dropped;
        if outcomes == self.flows_total {
            Ok(())
        } else {
            Err(MetricsError::Unbalanced {
                flows_total: self.flows_total,
                delivered_authentic: self.delivered_authentic,
                delivered_compromised: self.delivered_compromised,
                dropped: self.dropped,
            })
        }
    }

    pub fn csv_header() -> &'static str {
        "scheme,n_nodes,seed,success_rate,total_messages,flows_total,\
         delivered_authentic,delivered_compromised,dropped,\
         data_transmissions,control_messages,consensus_messages"
    }

    /// One CSV row. An empty run reports a zero rate rather than an
    /// error so sweeps over degenerate scenarios still serialize.
    pub fn csv_row(&self) -> String {
        let rate = self.success_rate().unwrap_or(0.0);
        format!(
            "{},{},{},{:.6},{},{},{},{},{},{},{},{}",
            self.scheme.name(),
            self.n_nodes,
            self.seed,
            rate,
            self.total_messages(),
            self.flows_total,
            self.delivered_authentic,
            self.delivered_compromised,
            self.dropped,
            self.data_transmissions,
            self.control_messages,
            self.consensus_messages,
        )
    }
}
