"""Test static schemes and the scheme name registry."""

from __future__ import annotations

import collections

import numpy as np
import pytest

from lora_drcc.channel import Position
from lora_drcc.exceptions import ConfigValidationError
from lora_drcc.radio import RadioParams
from lora_drcc.schemes import (
    AdrScheme,
    DrccScheme,
    FairScheme,
    Scheme,
    SchemeOptions,
    StaticScheme,
    UplinkRecord,
    scheme_names,
)
from lora_drcc.simulation import NodeState

OPTIONS = SchemeOptions(channel_count=8, total_nodes=800)


def make_nodes(count: int) -> list[NodeState]:
    return [
        NodeState(
            node_id=node_id,
            position=Position(10.0, 0.0),
            radio=RadioParams(12),
            traffic_period=30.0,
        )
        for node_id in range(count)
    ]


def test_scheme_names():
    assert scheme_names() == [
        "static-sf7",
        "static-sf8",
        "static-sf9",
        "static-sf10",
        "static-sf11",
        "static-sf12",
        "adr",
        "fadr",
        "drcc",
    ]


@pytest.mark.parametrize(
    "name,cls",
    [
        pytest.param("static-sf7", StaticScheme, id="static"),
        pytest.param("adr", AdrScheme, id="adr"),
        pytest.param("fadr", FairScheme, id="fadr"),
        pytest.param("drcc", DrccScheme, id="drcc"),
    ],
)
def test_from_name(name: str, cls: type[Scheme]):
    assert isinstance(Scheme.from_name(name, OPTIONS), cls)


@pytest.mark.parametrize(
    "name,cls,kwargs",
    [
        pytest.param("static-sf9", StaticScheme, {"sf": 9}, id="static"),
        pytest.param("drcc", DrccScheme, {}, id="drcc"),
        pytest.param("fadr", FairScheme, {}, id="fadr"),
    ],
)
def test_lookup(name: str, cls: type[Scheme], kwargs: dict[str, int]):
    assert Scheme.lookup(name) == (cls, kwargs)


def test_every_registered_name_resolves():
    for name in scheme_names():
        assert Scheme.from_name(name, OPTIONS).name in name


@pytest.mark.parametrize("name", ["static", "static-sf13", "static-sf6", "lorawan"])
def test_unknown_scheme_names(name: str):
    with pytest.raises(ConfigValidationError, match="Unknown scheme") as exc_info:
        Scheme.from_name(name, OPTIONS)
    assert exc_info.value.errors


def test_adaptive_flags():
    assert DrccScheme.adaptive
    assert AdrScheme.adaptive
    assert not FairScheme.adaptive
    assert not StaticScheme.adaptive


def test_static_setup_fixes_sf_and_draws_channels():
    scheme = Scheme.from_name("static-sf9", OPTIONS)
    commands = scheme.setup(make_nodes(800), np.random.default_rng(11))
    assert {command.data_rate for command in commands.values()} == {3}

    channels = collections.Counter(
        command.ch_mask.bit_length() - 1 for command in commands.values()
    )
    assert sorted(channels) == list(range(8))
    assert all(60 <= count <= 140 for count in channels.values())


def test_static_never_reconfigures():
    scheme = Scheme.from_name("static-sf7", OPTIONS)
    scheme.setup(make_nodes(1), np.random.default_rng(0))
    for fcnt in range(50):
        record = UplinkRecord(
            node_id=0,
            fcnt=fcnt,
            rssi=-125.0,
            snr=-15.0,
            sf=7,
            channel_index=0,
            time=fcnt * 30.0,
        )
        assert scheme.on_uplink(record) is None


def test_static_join():
    scheme = Scheme.from_name("static-sf12", OPTIONS)
    command = scheme.join(make_nodes(1)[0], np.random.default_rng(0))
    assert command.data_rate == 0
