"""Crop cost and price analysis: Tornqvist-Theil TFP indices, translog cost
systems with input-demand elasticities, and strategic support prices."""

__version__ = "0.1.0"

from agprice.data_model import (  # noqa: E402
    CostObservation,
    IndexSeries,
    ItemId,
    Kind,
    PriceQuantityPanel,
    ShareVector,
    shares_from_panel,
    validate_panel,
)
from agprice.elasticities import ElasticityReport, full_report  # noqa: E402
from agprice.index_numbers import (  # noqa: E402
    average_annual_growth,
    chain,
    tfp_link,
    tornqvist_input_link,
    tornqvist_output_link,
)
from agprice.policy import PolicyScenario, SspResult, evaluate_scenario  # noqa: E402
from agprice.translog import EstimationOptions, TranslogCoefficients, fit  # noqa: E402

__all__ = [
    "CostObservation",
    "ElasticityReport",
    "EstimationOptions",
    "IndexSeries",
    "ItemId",
    "Kind",
    "PolicyScenario",
    "PriceQuantityPanel",
    "ShareVector",
    "SspResult",
    "TranslogCoefficients",
    "average_annual_growth",
    "chain",
    "evaluate_scenario",
    "fit",
    "full_report",
    "shares_from_panel",
    "tfp_link",
    "tornqvist_input_link",
    "tornqvist_output_link",
    "validate_panel",
]
