//! Network ingestion and persistence: the native JSON instance format, an
//! EPANET-INP subset importer, and pump head-curve fitting.

mod curve_fit;
mod inp;
mod native;

pub use curve_fit::{fit_pump_curve, FitError, PumpCurveFit, PumpCurvePoint};
pub use inp::{parse_inp, parse_inp_with, InpConfig, InpError, InpImport};
pub use native::{parse_native, write_native, NativeError, SCHEMA_VERSION};
