use super::{ProtocolError, Result};
use crate::crypto::{canonical_encode, hash, Digest};
use crate::model::ParameterVector;

/// A verified update ready for aggregation.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptedUpdate {
    pub client_id: String,
    pub data_size: u64,
    pub update: ParameterVector,
}

/// Size-weighted mean `Σ (|D_i| / Σ|D_j|) · Δθ_i` over accepted updates.
///
/// Updates are folded in ascending client-id order so the result does not
/// depend on arrival order. Returns `None` when there is nothing to
/// aggregate (no updates, or zero total weight).
pub fn aggregate(updates: &[AcceptedUpdate]) -> Result<Option<ParameterVector>> {
    let Some(first) = updates.first() else {
        return Ok(None);
    };
    let layout = first.update.layout();
    if updates.iter().any(|u| u.update.layout() != layout) {
        return Err(ProtocolError::Model(
            crate::model::ModelError::LayoutMismatch,
        ));
    }
    let total: u128 = updates.iter().map(|u| u.data_size as u128).sum();
    if total == 0 {
        return Ok(None);
    }

    let mut ordered: Vec<&AcceptedUpdate> = updates.iter().collect();
    ordered.sort_by(|a, b| a.client_id.cmp(&b.client_id));

    let mut acc = vec![0.0; layout.size()];
    for u in ordered {
        let weight = u.data_size as f64 / total as f64;
        for (a, &v) in acc.iter_mut().zip(u.update.values()) {
            *a += weight * v;
        }
    }
    ParameterVector::new(layout.clone(), acc)
        .map(Some)
        .map_err(|_| ProtocolError::NonFiniteGlobal)
}

/// Server-side global model: current round, parameters and the digest of
/// every applied global update.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalModelState {
    round: u32,
    params: ParameterVector,
    history: Vec<Digest>,
}

impl GlobalModelState {
    pub fn new(params: ParameterVector, first_round: u32) -> Self {
        Self {
            round: first_round,
            params,
            history: Vec::new(),
        }
    }

    /// Round currently being collected.
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn history(&self) -> &[Digest] {
        &self.history
    }

    pub fn delta_digest(round: u32, delta: &ParameterVector) -> Digest {
        hash(&canonical_encode(delta.values(), round, "", 0).expect("empty id"))
    }

    /// `θ_G += Δθ_G`, advance the round and log the delta's digest.
    ///
    /// Zero entries of the delta leave the parameter bits untouched. A
    /// non-finite result aborts without changing state.
    pub fn apply_global(&mut self, delta: &ParameterVector) -> Result<Digest> {
        if delta.layout() != self.params.layout() {
            return Err(ProtocolError::Model(
                crate::model::ModelError::LayoutMismatch,
            ));
        }
        let values: Vec<f64> = self
            .params
            .values()
            .iter()
            .zip(delta.values())
            .map(|(&p, &d)| if d == 0.0 { p } else { p + d })
            .collect();
        let params = ParameterVector::new(self.params.layout().clone(), values)
            .map_err(|_| ProtocolError::NonFiniteGlobal)?;
        let digest = Self::delta_digest(self.round, delta);
        self.params = params;
        self.history.push(digest);
        self.round += 1;
        Ok(digest)
    }

    /// Closes a round in which nothing was aggregated.
    pub fn skip_round(&mut self) {
        self.round += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn accepted(id: &str, size: u64, values: Vec<f64>) -> AcceptedUpdate {
        AcceptedUpdate {
            client_id: id.into(),
            data_size: size,
            update: ParameterVector::flat(values).unwrap(),
        }
    }

    #[test]
    fn hand_example() {
        let out = aggregate(&[
            accepted("a", 10, vec![1.0, 1.0]),
            accepted("b", 30, vec![-1.0, 3.0]),
        ])
        .unwrap()
        .unwrap();
        assert_eq!(out.values(), &[-0.5, 2.5]);
    }

    #[test]
    fn single_client_is_exact() {
        let v = vec![0.1, -1.0 / 3.0, 1e-300, 7.25];
        let out = aggregate(&[accepted("x", 3, v.clone())]).unwrap().unwrap();
        assert_eq!(out.values(), &v[..]);
    }

    #[test]
    fn empty_and_weightless_inputs_are_noops() {
        assert_eq!(aggregate(&[]).unwrap(), None);
        assert_eq!(aggregate(&[accepted("a", 0, vec![1.0])]).unwrap(), None);
    }

    #[test]
    fn layouts_must_agree() {
        assert!(aggregate(&[
            accepted("a", 1, vec![1.0]),
            accepted("b", 1, vec![1.0, 2.0])
        ])
        .is_err());
    }

    #[test]
    fn arrival_order_does_not_matter() {
        let a = accepted("a", 3, vec![0.1, 0.7]);
        let b = accepted("b", 5, vec![0.3, -0.2]);
        let c = accepted("c", 7, vec![1e-3, 4.0]);
        let x = aggregate(&[a.clone(), b.clone(), c.clone()])
            .unwrap()
            .unwrap();
        let y = aggregate(&[c, a, b]).unwrap().unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn global_state_applies_and_logs() {
        let mut s = GlobalModelState::new(ParameterVector::flat(vec![1.0, 2.0]).unwrap(), 1);
        let zero = ParameterVector::flat(vec![0.0, 0.0]).unwrap();
        let d = s.apply_global(&zero).unwrap();
        assert_eq!(s.params().values(), &[1.0, 2.0]);
        assert_eq!(s.round(), 2);
        assert_eq!(s.history(), &[d]);

        let d1 = ParameterVector::flat(vec![0.5, -1.0]).unwrap();
        let d2 = ParameterVector::flat(vec![0.25, 3.0]).unwrap();
        s.apply_global(&d1).unwrap();
        s.apply_global(&d2).unwrap();
        assert_eq!(s.params().values(), &[1.0 + 0.5 + 0.25, 2.0 - 1.0 + 3.0]);
        assert_eq!(s.history().len(), 3);
        s.skip_round();
        assert_eq!(s.round(), 5);
        assert_eq!(s.history().len(), 3);
    }

    #[test]
    fn zero_delta_preserves_negative_zero_bits() {
        let mut s = GlobalModelState::new(ParameterVector::flat(vec![-0.0]).unwrap(), 1);
        s.apply_global(&ParameterVector::flat(vec![0.0]).unwrap())
            .unwrap();
        assert_eq!(s.params().values()[0].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn non_finite_result_aborts() {
        let mut s = GlobalModelState::new(ParameterVector::flat(vec![f64::MAX]).unwrap(), 1);
        let before = s.clone();
        assert_eq!(
            s.apply_global(&ParameterVector::flat(vec![f64::MAX]).unwrap())
                .unwrap_err(),
            ProtocolError::NonFiniteGlobal
        );
        assert_eq!(s, before);
    }

    proptest! {
        #[test]
        fn copies_of_one_update_aggregate_to_it(
            values in prop::collection::vec(-1e6f64..1e6, 1..8),
            sizes in prop::collection::vec(1u64..10_000, 1..6),
        ) {
            let ups: Vec<_> = sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| accepted(&format!("c{i}"), s, values.clone()))
                .collect();
            let out = aggregate(&ups).unwrap().unwrap();
            for (o, v) in out.values().iter().zip(&values) {
                prop_assert!((o - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }
}
