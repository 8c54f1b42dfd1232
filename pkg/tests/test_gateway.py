import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orch.adapters import AdapterId
from orch.errors import AdapterMismatchError, ScriptExhaustedError
from orch.gateway import (
    Completion,
    CompletionRequest,
    Constraint,
    Gateway,
    Message,
    ScriptedBackend,
    count_prompt_payload,
)
from orch.toolhub import validate_arguments

from helpers import scripted_gateway


def req(reply_adapter=None, constraint=None, messages=None):
    return CompletionRequest(
        messages=messages or [Message("system", "s"), Message("user", "u")],
        adapter=reply_adapter or AdapterId.base(),
        constraint=constraint or Constraint.free(),
    )


def test_enum_constraint_selects_member():
    gateway, _ = scripted_gateway([(AdapterId.base(), "filesystem")])
    completion = gateway.complete(req(constraint=Constraint.enum(
        ["filesystem", "notion", "monday"])))
    assert completion == Completion(content="filesystem", finish="stop")


def test_enum_single_option_forced_choice():
    gateway, _ = scripted_gateway([(AdapterId.base(), "only")])
    completion = gateway.complete(req(constraint=Constraint.enum(["only"])))
    assert completion.content == "only"


def test_enum_out_of_set_reply_is_constraint_violation():
    gateway, _ = scripted_gateway([(AdapterId.base(), "bogus")])
    completion = gateway.complete(req(constraint=Constraint.enum(["a", "b"])))
    assert completion.finish == "constraint-violation"


def test_json_schema_constraint_validates_with_tool_checker(registry_fs):
    spec = registry_fs.get_tool("filesystem", "read_file")
    gateway, _ = scripted_gateway([(AdapterId.base(), '{"path":"a.txt"}')])
    completion = gateway.complete(req(constraint=Constraint.json_schema(spec.schema)))
    assert completion.finish == "stop"
    # cross-check with the independent schema oracle
    assert validate_arguments(spec, json.loads(completion.content)).ok


def test_json_schema_rejects_invalid():
    schema = {"type": "object", "properties": {"n": {"type": "integer"}},
              "required": ["n"], "additionalProperties": False}
    gateway, _ = scripted_gateway([(AdapterId.base(), '{"n":"three"}')])
    completion = gateway.complete(req(constraint=Constraint.json_schema(schema)))
    assert completion.finish == "constraint-violation"


def test_json_schema_strips_code_fences():
    schema = {"type": "object", "properties": {"n": {"type": "integer"}}}
    gateway, _ = scripted_gateway([(AdapterId.base(), '```json\n{"n": 3}\n```')])
    completion = gateway.complete(req(constraint=Constraint.json_schema(schema)))
    assert completion.finish == "stop"


def test_script_consumed_in_order_and_recorded():
    script = [(AdapterId.base(), "one"), (AdapterId.selector("fs"), "two"),
              (AdapterId.base(), "three")]
    gateway, backend = scripted_gateway(script)
    replies = [
        gateway.complete(req()).content,
        gateway.complete(req(reply_adapter=AdapterId.selector("fs"))).content,
        gateway.complete(req()).content,
    ]
    assert replies == ["one", "two", "three"]
    assert len(backend.requests) == 3


def test_adapter_mismatch_names_expected_and_actual():
    gateway, _ = scripted_gateway([(AdapterId.selector("fs"), "x")])
    with pytest.raises(AdapterMismatchError, match="sel:fs.*base"):
        gateway.complete(req())


def test_script_exhausted():
    gateway, _ = scripted_gateway([(AdapterId.base(), "x")])
    gateway.complete(req())
    with pytest.raises(ScriptExhaustedError):
        gateway.complete(req())


def test_wildcard_adapter_entry():
    gateway, _ = scripted_gateway([("*", "anything")])
    assert gateway.complete(req(reply_adapter=AdapterId.selector("t"))).content == "anything"


def test_scripted_backend_deterministic():
    script = [(AdapterId.base(), "a"), (AdapterId.base(), "b")]
    first = [scripted_gateway(script)[0].complete(req()).content for _ in range(1)]
    for _ in range(3):
        gateway, _ = scripted_gateway(script)
        assert gateway.complete(req()).content == first[0]


def test_count_prompt_payload_empty():
    assert count_prompt_payload([]) == (0, 0)


def test_count_prompt_payload_four_chars_per_token():
    messages = [Message("user", "x" * 400)]
    assert count_prompt_payload(messages) == (400, 100)


def test_count_prompt_payload_rounds_up():
    assert count_prompt_payload([Message("user", "x" * 401)]) == (401, 101)


def test_messages_must_be_nonempty():
    with pytest.raises(ValueError):
        CompletionRequest(messages=[], adapter=AdapterId.base())


def test_first_message_role_checked():
    with pytest.raises(ValueError):
        CompletionRequest(messages=[Message("tool", "x")], adapter=AdapterId.base())


def test_enum_options_must_be_unique():
    with pytest.raises(ValueError):
        Constraint.enum(["a", "a"])


def test_request_roundtrip_bit_exact():
    request = req(constraint=Constraint.enum(["a", "b"]))
    assert CompletionRequest.from_dict(request.to_dict()) == request
    request = req(constraint=Constraint.json_schema({"type": "object"}))
    assert CompletionRequest.from_dict(request.to_dict()) == request


@settings(max_examples=60, deadline=None)
@given(
    options=st.lists(st.text(alphabet="abcdef_", min_size=1, max_size=8),
                     min_size=1, max_size=6, unique=True),
    data=st.data(),
)
def test_property_enum_completions_stay_in_set(options, data):
    valid = data.draw(st.booleans())
    reply = data.draw(st.sampled_from(options)) if valid else "~not-an-option~"
    gateway, _ = scripted_gateway([(AdapterId.base(), reply)])
    completion = gateway.complete(req(constraint=Constraint.enum(options)))
    if completion.finish == "stop":
        assert completion.content in options
    else:
        assert completion.finish == "constraint-violation"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["system", "user", "assistant", "tool"]),
                          st.text(max_size=40)), min_size=1, max_size=6))
def test_property_recorder_roundtrip(raw_messages):
    role0, content0 = raw_messages[0]
    if role0 not in ("system", "user"):
        raw_messages[0] = ("user", content0)
    request = CompletionRequest(
        messages=[Message(r, c) for r, c in raw_messages],
        adapter=AdapterId.argument("ts", "tool"),
        constraint=Constraint.json_schema({"type": "object"}),
        max_tokens=77, temperature=0.5,
    )
    rebuilt = CompletionRequest.from_dict(json.loads(json.dumps(request.to_dict())))
    assert rebuilt == request
