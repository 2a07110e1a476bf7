//! End-of-epoch hook registry for host training loops.
//!
//! The host calls [`HookRegistry::fire_epoch_end`] after the optimizer step of
//! an epoch's final iteration and before validation.

use crate::engine::{Engine, EngineConfig};
use crate::error::{Result, WeError};
use crate::model::ParameterStore;
use crate::report::EvolutionReport;
use crate::scalar::Scalar;

pub const EVOLUTION_HOOK: &str = "weight-evolution";

pub trait EpochHook<S: Scalar>: Send {
    fn name(&self) -> &str;

    /// Runs at the end of `epoch` (1-based). The `&mut` store is the
    /// exclusive session.
    fn on_epoch_end(
        &mut self,
        epoch: usize,
        store: &mut dyn ParameterStore<S>,
    ) -> Result<Option<EvolutionReport>>;
}

impl<S: Scalar> EpochHook<S> for Engine<S> {
    fn name(&self) -> &str {
        EVOLUTION_HOOK
    }

    fn on_epoch_end(
        &mut self,
        epoch: usize,
        store: &mut dyn ParameterStore<S>,
    ) -> Result<Option<EvolutionReport>> {
        if !self.is_due(epoch) {
            return Ok(None);
        }
        self.evolve_once(store, epoch).map(Some)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HookHandle(u64);

pub struct HookRegistry<S: Scalar> {
    hooks: Vec<(HookHandle, Box<dyn EpochHook<S>>)>,
    next: u64,
}

impl<S: Scalar> Default for HookRegistry<S> {
    fn default() -> Self {
        HookRegistry {
            hooks: Vec::new(),
            next: 0,
        }
    }
}

impl<S: Scalar> HookRegistry<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, hook: Box<dyn EpochHook<S>>) -> HookHandle {
        let handle = HookHandle(self.next);
        self.next += 1;
        self.hooks.push((handle, hook));
        handle
    }

    pub fn detach(&mut self, handle: HookHandle) -> Result<Box<dyn EpochHook<S>>> {
        let pos = self
            .hooks
            .iter()
            .position(|(h, _)| *h == handle)
            .ok_or(WeError::UnknownHook(handle.0))?;
        Ok(self.hooks.remove(pos).1)
    }

    pub fn is_attached(&self, name: &str) -> bool {
        self.hooks.iter().any(|(_, h)| h.name() == name)
    }

    pub fn len(&self) -> usize {
        self.hooks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hooks.is_empty()
    }

    /// Runs every hook in registration order; the first error stops the
    /// sequence.
    pub fn fire_epoch_end(
        &mut self,
        epoch: usize,
        store: &mut dyn ParameterStore<S>,
    ) -> Result<Vec<EvolutionReport>> {
        let mut reports = Vec::new();
        for (_, hook) in &mut self.hooks {
            if let Some(r) = hook.on_epoch_end(epoch, store)? {
                reports.push(r);
            }
        }
        Ok(reports)
    }
}

/// Registers a weight-evolution engine on `registry`. Only one may be
/// attached at a time.
pub fn attach<S: Scalar>(
    registry: &mut HookRegistry<S>,
    config: EngineConfig<S>,
) -> Result<HookHandle> {
    if registry.is_attached(EVOLUTION_HOOK) {
        return Err(WeError::AlreadyAttached);
    }
    let engine = Engine::new(config)?;
    Ok(registry.register(Box::new(engine)))
}
