use std::time::Duration;

use crate::protocol::{AuditRecord, Provenance, RoundOutcome, VerdictReason};

/// One submission as scored by the metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmissionRecord {
    /// Claimed sender; `None` if the bytes did not decode.
    pub client_id: Option<String>,
    pub provenance: Provenance,
    pub verdict: VerdictReason,
    pub admitted: bool,
    pub attributable: bool,
}

impl SubmissionRecord {
    pub fn from_outcome(outcome: &RoundOutcome) -> Vec<Self> {
        outcome
            .submissions
            .iter()
            .map(|s| Self {
                client_id: s.received.client_id.clone(),
                provenance: s.provenance,
                verdict: s.received.verdict.reason,
                admitted: s.received.admitted,
                attributable: s.received.attributable,
            })
            .collect()
    }
}

/// A numerator over a denominator; the rate is undefined when the
/// denominator is zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ratio {
    pub hits: usize,
    pub total: usize,
}

impl Ratio {
    pub fn percent(self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.hits as f64 / self.total as f64)
    }

    fn add(self, other: Ratio) -> Ratio {
        Ratio {
            hits: self.hits + other.hits,
            total: self.total + other.total,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundMetrics {
    /// Honestly sent updates passing the digest and signature checks.
    pub verification: Ratio,
    /// Aggregated updates whose signature verifies under the key registered
    /// for their claimed id.
    pub authentication: Ratio,
    /// Audit records whose stored triple fails re-verification.
    pub incidents: usize,
}

impl RoundMetrics {
    pub fn verification_rate(&self) -> Option<f64> {
        self.verification.percent()
    }

    pub fn authentication_rate(&self) -> Option<f64> {
        self.authentication.percent()
    }
}

pub fn compute_metrics<'a>(
    records: &[SubmissionRecord],
    audit: impl IntoIterator<Item = &'a AuditRecord>,
) -> RoundMetrics {
    let honest = records.iter().filter(|r| r.provenance.honest_sent());
    let admitted = records.iter().filter(|r| r.admitted);
    RoundMetrics {
        verification: Ratio {
            hits: honest
                .clone()
                .filter(|r| r.verdict.integrity_verified())
                .count(),
            total: honest.count(),
        },
        authentication: Ratio {
            hits: admitted.clone().filter(|r| r.attributable).count(),
            total: admitted.count(),
        },
        incidents: audit.into_iter().filter(|a| !a.replay()).count(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub round: u32,
    /// Submissions the server received.
    pub client_count: usize,
    pub records: Vec<SubmissionRecord>,
    pub metrics: RoundMetrics,
    pub aggregated: usize,
    /// Nothing was aggregated, so the global model is unchanged.
    pub no_update: bool,
    pub dropouts: usize,
    /// Global accuracy on the held-out set after this round.
    pub accuracy: f64,
    pub duration: Duration,
}

impl RoundReport {
    pub fn verification_rate(&self) -> Option<f64> {
        self.metrics.verification_rate()
    }

    pub fn authentication_rate(&self) -> Option<f64> {
        self.metrics.authentication_rate()
    }

    pub fn non_repudiation_incidents(&self) -> usize {
        self.metrics.incidents
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub submissions: usize,
    /// Pooled over all rounds.
    pub metrics: RoundMetrics,
    pub final_accuracy: Option<f64>,
    pub duration: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsTable {
    pub reports: Vec<RoundReport>,
    /// Set when the run stopped before its last round.
    pub aborted: Option<String>,
}

impl MetricsTable {
    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.reports.last().map(|r| r.accuracy)
    }

    pub fn summary(&self) -> Summary {
        let mut metrics = RoundMetrics {
            verification: Ratio::default(),
            authentication: Ratio::default(),
            incidents: 0,
        };
        for r in &self.reports {
            metrics.verification = metrics.verification.add(r.metrics.verification);
            metrics.authentication = metrics.authentication.add(r.metrics.authentication);
            metrics.incidents += r.metrics.incidents;
        }
        Summary {
            submissions: self.reports.iter().map(|r| r.client_count).sum(),
            metrics,
            final_accuracy: self.final_accuracy(),
            duration: self.reports.iter().map(|r| r.duration).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{hash, keygen_signature, RSA_PKCS1_SHA256};

    fn record(provenance: Provenance, verdict: VerdictReason, admitted: bool) -> SubmissionRecord {
        SubmissionRecord {
            client_id: Some("c".into()),
            provenance,
            verdict,
            admitted,
            attributable: admitted && verdict == VerdictReason::Ok,
        }
    }

    fn audit(valid: bool) -> AuditRecord {
        let key = keygen_signature(RSA_PKCS1_SHA256, 1024, 3).unwrap();
        let digest = hash(b"u");
        AuditRecord {
            client_id: "c".into(),
            round: 1,
            digest: if valid { digest } else { hash(b"v") },
            signature: key.sign(&digest),
            public_key: Some(key.public().to_bytes()),
        }
    }

    #[test]
    fn honest_round_is_perfect() {
        let records = vec![record(Provenance::Honest, VerdictReason::Ok, true); 4];
        let audits = vec![audit(true); 4];
        let m = compute_metrics(&records, &audits);
        assert_eq!(m.verification_rate(), Some(100.0));
        assert_eq!(m.authentication_rate(), Some(100.0));
        assert_eq!(m.incidents, 0);
    }

    #[test]
    fn one_tampered_of_four() {
        let mut records = vec![record(Provenance::Honest, VerdictReason::Ok, true); 3];
        records.push(record(
            Provenance::Tampered,
            VerdictReason::DigestMismatch,
            false,
        ));
        let audits = vec![audit(true); 3];
        let m = compute_metrics(&records, &audits);
        assert_eq!(m.verification_rate(), Some(75.0));
        assert_eq!(m.authentication_rate(), Some(100.0));
        assert_eq!(m.incidents, 0);
    }

    #[test]
    fn injected_traffic_is_outside_verification() {
        let records = vec![
            record(Provenance::Honest, VerdictReason::Ok, true),
            record(Provenance::Sybil, VerdictReason::UnknownIdentity, false),
            record(Provenance::Replayed, VerdictReason::ReplayedRound, false),
        ];
        let m = compute_metrics(&records, &[audit(true)]);
        assert_eq!(m.verification, Ratio { hits: 1, total: 1 });
        assert_eq!(m.authentication, Ratio { hits: 1, total: 1 });
    }

    #[test]
    fn empty_round_has_no_rates() {
        let m = compute_metrics(&[], &[]);
        assert_eq!(m.verification_rate(), None);
        assert_eq!(m.authentication_rate(), None);
        assert_eq!(m.incidents, 0);
    }

    #[test]
    fn failed_replay_is_an_incident() {
        let m = compute_metrics(&[], &[audit(true), audit(false)]);
        assert_eq!(m.incidents, 1);
    }
}
