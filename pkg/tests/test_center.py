import pytest

from autopark import comms
from autopark.center import (
    CommandRejected,
    ControlCenter,
    LotRegistry,
    OwnerMessage,
    SmsGateway,
)


def make_center(auto_grant=False, slots=(1, 2, 3), car=7):
    registry = LotRegistry()
    for s in slots:
        registry.register_slot(s)
    registry.register_car(car)
    return ControlCenter(registry, SmsGateway(), auto_grant=auto_grant)


def status(code):
    return {"kind": "status", "code": code, "tick": 0}


def slot_msg(slot_id):
    return {"kind": "slot", "slot_id": slot_id, "tick": 0}


class TestCarMessages:
    def test_park_complete_occupies_and_notifies(self):
        center = make_center()
        center.handle_car_message(7, status("E"), tick=5)
        center.handle_car_message(7, slot_msg(2), tick=5)
        assert center.registry.slot_occupancy[2] == 7
        assert len(center.sms.outbound) == 1
        assert "slot 2" in center.sms.outbound[0].payload

    def test_duplicate_park_report_is_idempotent(self):
        center = make_center()
        for _ in range(3):
            center.handle_car_message(7, status("E"), tick=5)
            center.handle_car_message(7, slot_msg(2), tick=5)
        assert len(center.sms.outbound) == 1
        assert center.registry.occupied_count() == 1

    def test_congestion_raises_gui_alarm(self):
        center = make_center()
        center.handle_car_message(7, status("C"), tick=9)
        assert center.registry.cars[7].alarm == "C"
        assert any(e["kind"] == "alarm" and e["code"] == "C" for e in center.gui_events)

    def test_unknown_car_dropped(self):
        center = make_center()
        center.handle_car_message(99, status("S"), tick=0)
        assert 99 not in center.registry.cars

    def test_leaving_frees_the_slot(self):
        center = make_center()
        center.handle_car_message(7, status("E"), tick=1)
        center.handle_car_message(7, slot_msg(3), tick=1)
        center.handle_car_message(7, status("L"), tick=2)
        assert center.registry.slot_occupancy[3] is None
        assert center.registry.cars[7].parked_slot is None

    def test_registry_conservation_through_lifecycle(self):
        center = make_center()
        msgs = [status("Q"), status("S"), status("V"), status("E"), slot_msg(1),
                status("L")]
        for i, m in enumerate(msgs):
            center.handle_car_message(7, m, tick=i)
            assert center.registry.occupied_count() == center.registry.parked_count()


class TestOperatorCommands:
    def test_grant_on_pending_request(self):
        center = make_center()
        center.handle_car_message(7, status("Q"), tick=0)
        assert center.registry.cars[7].pending_request
        code = center.operator_command("grant", 7, tick=1)
        assert code == comms.CMD_GRANT
        assert not center.registry.cars[7].pending_request
        assert center.outgoing == [comms.CMD_GRANT]

    def test_deny_on_pending_request(self):
        center = make_center()
        center.handle_car_message(7, status("Q"), tick=0)
        assert center.operator_command("deny", 7, tick=1) == comms.CMD_DENY

    def test_grant_without_request_rejected(self):
        center = make_center()
        with pytest.raises(CommandRejected, match="no parking request"):
            center.operator_command("grant", 7, tick=0)

    def test_resume_without_alarm_rejected(self):
        center = make_center()
        with pytest.raises(CommandRejected, match="no active alarm"):
            center.operator_command("resume", 7, tick=0)

    def test_resume_on_alarm(self):
        center = make_center()
        center.handle_car_message(7, status("C"), tick=0)
        assert center.operator_command("resume", 7, tick=1) == comms.CMD_RESUME
        assert center.registry.cars[7].alarm is None

    def test_manual_on_alarm(self):
        center = make_center()
        center.handle_car_message(7, status("X"), tick=0)
        assert center.operator_command("manual", 7, tick=1) == comms.CMD_MANUAL

    def test_auto_grant(self):
        center = make_center(auto_grant=True)
        center.handle_car_message(7, status("Q"), tick=0)
        assert center.outgoing == [comms.CMD_GRANT]


class TestLeaveRequests:
    def parked_center(self):
        center = make_center()
        center.handle_car_message(7, status("E"), tick=0)
        center.handle_car_message(7, slot_msg(1), tick=0)
        return center

    def test_parked_car_gets_leave_command(self):
        center = self.parked_center()
        code = center.handle_leave_request(
            OwnerMessage("inbound", 7, "", "7,leave-request"), tick=1)
        assert code == comms.CMD_LEAVE
        assert center.outgoing == [comms.CMD_LEAVE]

    def test_unknown_car_rejected_via_sms(self):
        center = make_center()
        code = center.handle_leave_request(
            OwnerMessage("inbound", 99, "", "99,leave-request"), tick=1)
        assert code is None
        assert center.sms.outbound[-1].payload.endswith("rejected")

    def test_not_parked_rejected(self):
        center = make_center()
        code = center.handle_leave_request(
            OwnerMessage("inbound", 7, "", "7,leave-request"), tick=1)
        assert code is None
        assert center.sms.outbound[-1].payload.endswith("rejected")

    def test_request_while_already_leaving_is_noop(self):
        center = self.parked_center()
        center.handle_car_message(7, status("L"), tick=2)
        n_msgs = len(center.sms.outbound)
        code = center.handle_leave_request(
            OwnerMessage("inbound", 7, "", "7,leave-request"), tick=3)
        assert code is None
        assert len(center.sms.outbound) == n_msgs  # no rejection either

    def test_slot_exclusivity_enforced(self):
        center = make_center()
        center.registry.register_car(8)
        center.handle_car_message(7, status("E"), tick=0)
        center.handle_car_message(7, slot_msg(1), tick=0)
        with pytest.raises(ValueError, match="already held"):
            center.registry.occupy(1, 8)
