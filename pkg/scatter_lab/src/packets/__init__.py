from .packets import (
    PacketSpec,
    PlacedPacket,
    StandardPacket,
    dilate_place,
    elliptic_radius,
    packet_cauchy_data,
    second_moment_radius,
    standard_packet,
)
