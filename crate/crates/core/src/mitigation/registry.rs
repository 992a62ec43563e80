use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Envelope, MitigationConfig, Mitigator, Passthrough, Proposed, Tdt};
use crate::nn::GruNetwork;
use crate::{Error, Result};

/// What a factory may draw on when building a method.
#[derive(Debug, Clone, Default)]
pub struct MethodContext {
    pub config: MitigationConfig,
    pub model: Option<Arc<GruNetwork>>,
}

pub type MethodFactory = fn(&MethodContext) -> Result<Box<dyn Mitigator>>;

/// Mitigation methods by name.
#[derive(Clone)]
pub struct MethodRegistry {
    factories: BTreeMap<&'static str, MethodFactory>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("none", |_| Ok(Box::new(Passthrough)));
        r.register("tdt", |ctx| Ok(Box::new(Tdt::new(ctx.config)?)));
        r.register("envelope", |ctx| Ok(Box::new(Envelope::new(ctx.config)?)));
        r.register("proposed", |ctx| {
            let model = ctx.model.clone().ok_or(Error::ModelRequired)?;
            Ok(Box::new(Proposed::new(model)))
        });
        r
    }

    /// Add or replace a method.
    pub fn register(&mut self, name: &'static str, factory: MethodFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(&self, name: &str, ctx: &MethodContext) -> Result<Box<dyn Mitigator>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))?;
        factory(ctx)
    }

    /// Build several methods, failing on the first unknown or unbuildable one.
    pub fn build_all<S: AsRef<str>>(&self, names: &[S], ctx: &MethodContext) -> Result<Vec<Box<dyn Mitigator>>> {
        names.iter().map(|n| self.build(n.as_ref(), ctx)).collect()
    }
}
