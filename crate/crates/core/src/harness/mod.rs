//! Instance specs, seeded generators, the brute-force extraction oracle and
//! the external-map wire protocol.

pub mod external;
pub mod gen;
pub mod oracle;
pub mod spec;

pub use external::{ExternalMap, DEFAULT_TIMEOUT_MS};
pub use gen::{composition_spec, generate_spec, spec_symbol, CatalogKind, PERTURBATION};
pub use oracle::{oracle_extract, OracleResult, OracleRow, ORACLE_GUARD};
pub use spec::{generate, Instance, InstanceSpec, MapSpec, Trigger, SCHEMA_VERSION};
