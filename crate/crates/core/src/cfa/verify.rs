use std::fmt;

use super::{cfa_check, AttestationReport, ControlFlowGraph};
use crate::crypto::PublicKey;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HaltReason {
    ChainTamper,
    BadSignature,
    IllegalTransition,
    WrongEndpoints,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HaltReason::ChainTamper => "chain-tamper",
            HaltReason::BadSignature => "bad-signature",
            HaltReason::IllegalTransition => "illegal-transition",
            HaltReason::WrongEndpoints => "wrong-endpoints",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// `index` is the offending entry; for seal failures it is the entry count.
    Halt {
        index: usize,
        reason: HaltReason,
    },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// Replays a sealed trace: chain digests, seal signature, endpoints and every
/// transition. The first failure halts verification.
pub fn verify_trace(
    graph: &ControlFlowGraph,
    report: &AttestationReport,
    key: &PublicKey,
) -> Verdict {
    let halt = |index, reason| Verdict::Halt { index, reason };
    let log = &report.log;

    if let Err(index) = log.verify_chain() {
        return halt(index, HaltReason::ChainTamper);
    }
    if log.head() != report.final_digest {
        return halt(log.len(), HaltReason::ChainTamper);
    }
    if !report.signature_valid(key) {
        return halt(log.len(), HaltReason::BadSignature);
    }

    let labels: Vec<_> = log.labels().collect();
    let Some(&first) = labels.first() else {
        return halt(0, HaltReason::WrongEndpoints);
    };
    if !cfa_check(graph, None, first) {
        return halt(0, HaltReason::WrongEndpoints);
    }
    for (i, pair) in labels.windows(2).enumerate() {
        if !cfa_check(graph, Some(pair[0]), pair[1]) {
            return halt(i + 1, HaltReason::IllegalTransition);
        }
    }
    if labels[labels.len() - 1] != graph.end() {
        return halt(labels.len() - 1, HaltReason::WrongEndpoints);
    }
    Verdict::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfa::{Checkpoint, CheckpointLog, Label};
    use crate::crypto::{keygen_signature, SignatureKeyPair, RSA_PKCS1_SHA256};
    use std::sync::OnceLock;

    fn key() -> &'static SignatureKeyPair {
        static KEY: OnceLock<SignatureKeyPair> = OnceLock::new();
        KEY.get_or_init(|| keygen_signature(RSA_PKCS1_SHA256, 1024, 77).unwrap())
    }

    fn sealed(labels: &[Label]) -> AttestationReport {
        let log = CheckpointLog::rechain(labels.iter().map(|&l| Checkpoint::new(l, "c", 1)));
        AttestationReport::seal("c", log, key())
    }

    #[test]
    fn honest_client_trace_verifies() {
        let g = ControlFlowGraph::default_client();
        let report = sealed(&ControlFlowGraph::client_path());
        assert_eq!(verify_trace(&g, &report, key().public()), Verdict::Ok);
    }

    #[test]
    fn server_self_loop_admits_many_receipts() {
        use Label::*;
        let g = ControlFlowGraph::default_server();
        let report = sealed(&[
            RoundStart,
            ServerReceived,
            ServerReceived,
            ServerReceived,
            ServerVerified,
            Aggregated,
            GlobalApplied,
            RoundEnd,
        ]);
        assert!(verify_trace(&g, &report, key().public()).is_ok());
    }

    #[test]
    fn skipped_signing_step_is_illegal() {
        use Label::*;
        let g = ControlFlowGraph::default_client();
        let report = sealed(&[
            RoundStart,
            TrainBegin,
            TrainEnd,
            UpdateHashed,
            UpdateSent,
            RoundEnd,
        ]);
        assert_eq!(
            verify_trace(&g, &report, key().public()),
            Verdict::Halt {
                index: 4,
                reason: HaltReason::IllegalTransition
            }
        );
    }

    #[test]
    fn endpoints_are_enforced() {
        use Label::*;
        let g = ControlFlowGraph::default_client();
        let truncated = sealed(&[RoundStart, TrainBegin, TrainEnd]);
        assert_eq!(
            verify_trace(&g, &truncated, key().public()),
            Verdict::Halt {
                index: 2,
                reason: HaltReason::WrongEndpoints
            }
        );
        let headless = sealed(&[TrainBegin, TrainEnd]);
        assert_eq!(
            verify_trace(&g, &headless, key().public()),
            Verdict::Halt {
                index: 0,
                reason: HaltReason::WrongEndpoints
            }
        );
        assert_eq!(
            verify_trace(&g, &sealed(&[]), key().public()),
            Verdict::Halt {
                index: 0,
                reason: HaltReason::WrongEndpoints
            }
        );
    }

    #[test]
    fn reordered_entry_halts() {
        let g = ControlFlowGraph::default_client();
        let mut report = sealed(&ControlFlowGraph::client_path());
        let mut entries = report.log.entries().to_vec();
        entries.swap(2, 3);
        report.log = CheckpointLog::from_entries(entries);
        assert_eq!(
            verify_trace(&g, &report, key().public()),
            Verdict::Halt {
                index: 2,
                reason: HaltReason::ChainTamper
            }
        );
    }

    #[test]
    fn forged_seal_rejected() {
        let g = ControlFlowGraph::default_client();
        let other = keygen_signature(RSA_PKCS1_SHA256, 1024, 78).unwrap();
        let log = CheckpointLog::rechain(
            ControlFlowGraph::client_path()
                .iter()
                .map(|&l| Checkpoint::new(l, "c", 1)),
        );
        let report = AttestationReport::seal("c", log, &other);
        assert_eq!(
            verify_trace(&g, &report, key().public()),
            Verdict::Halt {
                index: 7,
                reason: HaltReason::BadSignature
            }
        );
    }

    #[test]
    fn stale_final_digest_is_chain_tamper() {
        let g = ControlFlowGraph::default_client();
        let mut report = sealed(&ControlFlowGraph::client_path());
        report.final_digest.0[0] ^= 1;
        assert_eq!(
            verify_trace(&g, &report, key().public()),
            Verdict::Halt {
                index: 7,
                reason: HaltReason::ChainTamper
            }
        );
    }
}
