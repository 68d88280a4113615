from .aggregation import (
    ClientWeights,
    ReceivedSet,
    aggregate_dense,
    bias_norm_sum,
    coefficients_dense,
    ideal_global,
    lambda_coeffs,
    lambda_coeffs_dense,
    local_aggregate,
)
from .latency import (
    LatencyBudget,
    bottleneck_rate,
    hop_latency,
    optimal_retention,
    payload_bits,
    total_latency,
    wire_payload_bits,
)
from .pruning import (
    ModelSpec,
    PruningError,
    PruningPlan,
    build_plan,
    decode_payload,
    encode_payload,
    eta_from_retention,
    floor_error_bound,
    full_plan,
    plan_for_retention,
    priority_order,
    prune_payload,
    reconstruct,
)
from .tdma import Schedule, tdma_schedule
