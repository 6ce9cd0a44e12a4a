"""Sensor channel model."""
import enum


class Channel(str, enum.Enum):
    """Enum for recorded signal channels.

    PPG and ACC channels are ring inputs. BVP_REF and RESP_REF come from the
    reference devices and are never fed to estimators.
    """

    PPG_IR = "ppg_ir"
    PPG_RED = "ppg_red"
    ACC_X = "acc_x"
    ACC_Y = "acc_y"
    ACC_Z = "acc_z"
    BVP_REF = "bvp_ref"
    RESP_REF = "resp_ref"

    @property
    def is_ppg(self) -> bool:
        """Check if channel is an optical PPG channel."""
        return self in (Channel.PPG_IR, Channel.PPG_RED)

    @property
    def is_acc(self) -> bool:
        """Check if channel is an accelerometer axis (g units)."""
        return self in (Channel.ACC_X, Channel.ACC_Y, Channel.ACC_Z)

    @property
    def is_ring_input(self) -> bool:
        """Check if channel is recorded by the ring itself."""
        return self.is_ppg or self.is_acc


RING_CHANNELS = tuple(channel for channel in Channel if channel.is_ring_input)
PPG_CHANNELS = tuple(channel for channel in Channel if channel.is_ppg)
ACC_CHANNELS = tuple(channel for channel in Channel if channel.is_acc)
