"""Desk-scale autonomous surface vehicle stack: plant simulation, autopilot,
lossy telemetry link, Dubins coverage planning, environmental sensing, and a
ground control station with an HTTP/streaming API.
"""

from .autopilot import (
    Autopilot,
    AutopilotConfig,
    KillDecision,
    Mission,
    PidGains,
    RcFrame,
    SafetyInputs,
    Waypoint,
    evaluate_kill,
    resolve_mode,
)
from .coverage import CoveragePlan, SurveyArea, partition, plan, transects
from .dubins import DubinsPath, dubins_connect
from .environment import (
    DepthPlane,
    EnvironmentField,
    GridField,
    ShearChannelField,
    UniformField,
    VortexField,
)
from .geo import (
    GeoPoint,
    Heading,
    LocalPoint,
    Vector2,
    bearing,
    boat_to_world,
    geo_to_local,
    local_to_geo,
    normalize_heading,
    world_to_boat,
    wrap_angle,
)
from .link import LinkModel, MissionReceiver, MissionSender, RadioLink, transmit
from .protocol import (
    FrameDecoder,
    Heartbeat,
    Kill,
    MissionAck,
    MissionCount,
    MissionItem,
    MissionRequest,
    Mode,
    SensorKind,
    SensorReport,
    SetMode,
    Telemetry,
    VelocitySetpoint,
    decode,
    encode,
)
from .scenario import Scenario, load_scenario
from .sensors import (
    AerationModel,
    DepthGrid,
    SampleQuality,
    SensorSample,
    filter_outliers,
    grid_depth,
    measure_relative,
    sample_depth,
    to_world,
)
from .simulation import SimWorld, compute_metrics, replay_metrics
from .tuning import auto_tune, line_test
from .vehicle import (
    EngineStatus,
    PwmSignal,
    ServoCalibration,
    Vehicle,
    VehicleParams,
    VehicleState,
    fuel_endurance,
    pwm_to_normalized,
)

__version__ = "0.1.0"
