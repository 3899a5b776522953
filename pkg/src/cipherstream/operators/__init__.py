from .model import (
    COMP_ABE,
    COMP_DET,
    COMP_HYBRID,
    LABEL_FILTER,
    LABEL_JOIN_PAYLOAD,
    LABEL_JOIN_TOKEN,
    LABEL_JOIN_WTOKEN,
    POLICY_KINDS,
    AggOut,
    AggProfile,
    DataTuple,
    EncProfile,
    JoinOut,
    PolicySpec,
    RecordOut,
    SecureTuple,
    TupleComponent,
    label_agg1,
    label_agg2,
    label_agg3_cum,
    label_agg3_val,
    label_map,
    label_rec,
)
from .owner import StreamOwner
from .keys import (
    CloudPolicyMaterial,
    IssuedPolicy,
    UserPolicyMaterial,
    issue_policy,
)
from .cloud import OutputItem, OutputPart, PolicyTransformer, make_transformer
from .user import PolicyDecryptor

__all__ = [
    "COMP_ABE",
    "COMP_DET",
    "COMP_HYBRID",
    "LABEL_FILTER",
    "LABEL_JOIN_PAYLOAD",
    "LABEL_JOIN_TOKEN",
    "LABEL_JOIN_WTOKEN",
    "POLICY_KINDS",
    "AggOut",
    "AggProfile",
    "DataTuple",
    "EncProfile",
    "JoinOut",
    "PolicySpec",
    "RecordOut",
    "SecureTuple",
    "TupleComponent",
    "label_agg1",
    "label_agg2",
    "label_agg3_cum",
    "label_agg3_val",
    "label_map",
    "label_rec",
    "StreamOwner",
    "CloudPolicyMaterial",
    "IssuedPolicy",
    "UserPolicyMaterial",
    "issue_policy",
    "OutputItem",
    "OutputPart",
    "PolicyTransformer",
    "make_transformer",
    "PolicyDecryptor",
]
