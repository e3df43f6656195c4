use serde::Serialize;

use super::ModelError;

/// Index of a value inside its [`Domain`]. Ordering follows declaration order.
pub type Value = u8;

/// A finite, ordered set of symbolic constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Domain {
    name: String,
    values: Vec<String>,
}

impl Domain {
    pub fn new(
        name: impl Into<String>,
        values: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(ModelError::EmptyDomain(name));
        }
        if values.len() > usize::from(Value::MAX) + 1 {
            return Err(ModelError::DomainTooLarge(name));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(ModelError::DuplicateValue {
                    domain: name,
                    value: v.clone(),
                });
            }
        }
        Ok(Self { name, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, value: &str) -> Option<Value> {
        self.values
            .iter()
            .position(|v| v == value)
            .map(|i| i as Value)
    }

    pub fn value_name(&self, value: Value) -> &str {
        &self.values[usize::from(value)]
    }

    /// Two domains are compatible when they list the same constants in the same order.
    pub fn same_values(&self, other: &Domain) -> bool {
        self.values == other.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(matches!(
            Domain::new("D", Vec::<String>::new()),
            Err(ModelError::EmptyDomain(_))
        ));
        assert!(matches!(
            Domain::new("D", ["a", "b", "a"]),
            Err(ModelError::DuplicateValue { .. })
        ));
    }

    #[test]
    fn values_keep_declaration_order() {
        let d = Domain::new("Tok", ["none", "tok"]).unwrap();
        assert_eq!(d.index_of("none"), Some(0));
        assert_eq!(d.index_of("tok"), Some(1));
        assert_eq!(d.index_of("other"), None);
        assert_eq!(d.value_name(1), "tok");
    }
}
