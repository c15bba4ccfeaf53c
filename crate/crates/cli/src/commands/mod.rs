mod converge;
mod price;
mod residual;
mod sample;

pub use converge::{converge, converge_report, ConvergeReport, ConvergeRow};
pub use price::{limit_price, price, price_one, PriceRecord};
pub use residual::{residual, residual_report, AgedResidual, ResidualSummary};
pub use sample::{draw, sample, SampleSummary};
