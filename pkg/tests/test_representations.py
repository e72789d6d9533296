import numpy as np
import pytest
from hypothesis import given, settings

from binarep.errors import EmptyStreamError
from binarep.events import EventStream, SensorGeometry
from binarep.representations import (
    BinaRepFrame,
    RepTensor,
    TensorLayout,
    assemble_tensor,
    bina_rep,
    binary_event_images,
    event_histogram,
    pack_bits,
    voxel_grid,
)
from genstreams import event_streams, random_stream

GEOM = SensorGeometry(34, 34)


def brute_binary(stream, count):
    """Per-event reference: linear boundary scan with a closed-right last window."""
    t0, t1 = stream.t_first, stream.t_last
    span = t1 - t0
    bounds = [t0 + -(-i * span // count) for i in range(count + 1)]
    h, w = stream.geometry.height, stream.geometry.width
    frames = np.zeros((count, 2, h, w), dtype=bool)
    for e in stream:
        window = count - 1
        for i in range(count):
            if bounds[i] <= e.t < bounds[i + 1]:
                window = i
                break
        if bounds[0] == bounds[-1]:
            window = 0
        frames[window, (e.p + 1) // 2, e.y, e.x] = True
    return frames


def brute_pack(frames, bit_depth, bit_order="early-msb"):
    """Reference packing by Horner accumulation / explicit shifts."""
    groups = frames.shape[0] // bit_depth
    out = np.zeros((groups,) + frames.shape[1:], dtype=np.int64)
    for k in range(groups):
        for i in range(bit_depth):
            bit = frames[k * bit_depth + i].astype(np.int64)
            if bit_order == "early-msb":
                out[k] = out[k] * 2 + bit
            else:
                out[k] = out[k] + (bit << i)
    return out


def brute_voxel(stream, num_bins):
    """Reference triangular-kernel accumulation, one event at a time."""
    h, w = stream.geometry.height, stream.geometry.width
    out = np.zeros((num_bins, h, w))
    t0, t1 = stream.t_first, stream.t_last
    for e in stream:
        if t1 == t0 or num_bins == 1:
            tstar = 0.0
        else:
            tstar = (num_bins - 1) * (e.t - t0) / (t1 - t0)
        for b in range(num_bins):
            weight = max(0.0, 1.0 - abs(b - tstar))
            if weight > 0:
                out[b, e.y, e.x] += e.p * weight
    return out


def single_pixel_stream(active_windows, num_windows, pixel=(0, 0), anchor=(1, 0)):
    """One pixel with On events in chosen sub-windows; anchors pin the span.

    Timestamps 0..num_windows-1 with anchor events at both ends land event
    t=i exactly in window i.
    """
    xs, ys, ts, ps = [], [], [], []
    for i in sorted(set(active_windows) | {0, num_windows - 1}):
        if i in active_windows:
            xs.append(pixel[0])
            ys.append(pixel[1])
            ts.append(i)
            ps.append(1)
        if i in (0, num_windows - 1):
            xs.append(anchor[0])
            ys.append(anchor[1])
            ts.append(i)
            ps.append(1)
    return EventStream.from_arrays(GEOM, xs, ys, ts, ps)


class TestBinaryEventImages:
    def test_single_event_sets_one_bit(self):
        s = EventStream.from_arrays(GEOM, [3], [4], [10], [1])
        stack = binary_event_images(s, 1)
        assert stack.frames.shape == (1, 2, 34, 34)
        assert stack.frames.dtype == bool
        assert stack.frames.sum() == 1
        assert stack.frames[0, 1, 4, 3]

    def test_polarity_channels(self):
        s = EventStream.from_arrays(GEOM, [0, 0], [0, 0], [0, 5], [1, -1])
        stack = binary_event_images(s, 1)
        assert stack.frames[0, 1, 0, 0]  # On -> channel 1
        assert stack.frames[0, 0, 0, 0]  # Off -> channel 0
        assert stack.frames.sum() == 2

    def test_duplicates_change_nothing(self):
        rng = np.random.default_rng(5)
        s = random_stream(rng)
        tripled = EventStream.from_arrays(
            s.geometry,
            np.repeat(s.x, 3),
            np.repeat(s.y, 3),
            np.repeat(s.t, 3),
            np.repeat(s.p, 3),
        )
        a = binary_event_images(s, 4)
        b = binary_event_images(tripled, 4)
        assert np.array_equal(a.frames, b.frames)

    def test_events_split_across_frames(self):
        s = EventStream.from_arrays(GEOM, list(range(10)), [0] * 10, list(range(10)), [1] * 10)
        stack = binary_event_images(s, 10)
        for i in range(10):
            assert stack.frames[i].sum() == 1
            assert stack.frames[i, 1, 0, i]

    def test_non_square_geometry_orientation(self):
        geom = SensorGeometry(3, 2)  # W=3, H=2
        s = EventStream.from_arrays(geom, [2], [1], [0], [1])
        stack = binary_event_images(s, 1)
        assert stack.frames.shape == (1, 2, 2, 3)
        assert stack.frames[0, 1, 1, 2]

    def test_empty_stream_rejected(self):
        with pytest.raises(EmptyStreamError):
            binary_event_images(EventStream.empty(GEOM), 4)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            s = random_stream(rng, max_events=120)
            count = int(rng.integers(1, 13))
            stack = binary_event_images(s, count)
            assert np.array_equal(stack.frames, brute_binary(s, count))


class TestPackBits:
    def _frames_from_bits(self, bits):
        frames = np.zeros((len(bits), 2, 1, 1), dtype=bool)
        for i, b in enumerate(bits):
            frames[i, 1, 0, 0] = bool(b)
        return frames

    @pytest.mark.parametrize(
        "bits,expected",
        [
            ([1, 0, 0, 0, 0, 0, 0, 0], 128),
            ([1, 1, 1, 1, 1, 1, 1, 1], 255),
            ([1, 0, 1, 1, 0, 0, 0, 1], 177),
            ([0, 0, 0, 0, 0, 0, 0, 0], 0),
        ],
    )
    def test_early_msb_patterns(self, bits, expected):
        packed = pack_bits(self._frames_from_bits(bits), 8)
        assert packed.shape == (1, 2, 1, 1)
        assert packed[0, 1, 0, 0] == expected
        assert packed[0, 0, 0, 0] == 0

    def test_early_lsb_reverses_weights(self):
        bits = [1, 0, 1, 1, 0, 0, 0, 1]
        packed = pack_bits(self._frames_from_bits(bits), 8, bit_order="early-lsb")
        assert packed[0, 1, 0, 0] == 1 + 4 + 8 + 128

    def test_depth_one_is_identity(self):
        frames = np.zeros((3, 2, 1, 1), dtype=bool)
        frames[1, 0, 0, 0] = True
        packed = pack_bits(frames, 1)
        assert packed.shape == frames.shape
        assert np.array_equal(packed, frames.astype(np.uint32))

    def test_full_32_bit_depth(self):
        frames = np.ones((32, 2, 1, 1), dtype=bool)
        packed = pack_bits(frames, 32)
        assert packed.dtype == np.uint32
        assert packed[0, 1, 0, 0] == (1 << 32) - 1

    def test_indivisible_frame_count_rejected(self):
        with pytest.raises(ValueError):
            pack_bits(np.zeros((6, 2, 1, 1), dtype=bool), 4)

    def test_unknown_bit_order_rejected(self):
        with pytest.raises(ValueError):
            pack_bits(np.zeros((8, 2, 1, 1), dtype=bool), 8, bit_order="msb-early")

    @pytest.mark.parametrize("groups,depth", [(1, 8), (2, 4), (3, 8), (4, 1), (2, 16)])
    def test_matches_brute_force(self, groups, depth):
        rng = np.random.default_rng(groups * 100 + depth)
        frames = rng.random((groups * depth, 2, 5, 7)) < 0.3
        for order in ("early-msb", "early-lsb"):
            assert np.array_equal(
                pack_bits(frames, depth, order), brute_pack(frames, depth, order)
            )


class TestBinaRep:
    def test_single_event_packs_as_msb(self):
        s = EventStream.from_arrays(GEOM, [3], [4], [10], [1])
        frames = bina_rep(s, 1, 8)
        assert len(frames) == 1
        assert frames[0].values.dtype == np.uint32
        assert frames[0].bit_depth == 8
        assert frames[0].max_value == 255
        assert frames[0].values[1, 4, 3] == 128
        assert frames[0].values.sum() == 128

    def test_known_bit_patterns(self):
        # pixel (0,0) active in sub-windows 0,2,3,7 of 8: 10110001 -> 177
        # anchor (1,0) active in sub-windows 0 and 7:    10000001 -> 129
        s = single_pixel_stream({0, 2, 3, 7}, 8)
        frames = bina_rep(s, 1, 8)
        assert frames[0].values[1, 0, 0] == 177
        assert frames[0].values[1, 0, 1] == 129

    def test_all_windows_active_saturates(self):
        s = single_pixel_stream(set(range(8)), 8)
        frames = bina_rep(s, 1, 8)
        assert frames[0].values[1, 0, 0] == 255

    def test_untouched_pixels_are_zero(self):
        s = single_pixel_stream({0}, 8)
        values = bina_rep(s, 1, 8)[0].values
        assert values[1, 5, 5] == 0
        assert values[0].sum() == 0  # no Off events anywhere

    @pytest.mark.parametrize("window", [0, 3, 7])
    def test_each_sub_window_has_its_weight(self, window):
        s = single_pixel_stream({window}, 8)
        values = bina_rep(s, 1, 8)[0].values
        assert values[1, 0, 0] == 1 << (7 - window)

    def test_early_lsb_order(self):
        s = single_pixel_stream({0}, 8)
        values = bina_rep(s, 1, 8, bit_order="early-lsb")[0].values
        assert values[1, 0, 0] == 1

    def test_equals_packed_binary_images(self):
        # the defining identity: T N-bit frames == bit-packing of T*N binary images
        rng = np.random.default_rng(21)
        for _ in range(20):
            s = random_stream(rng, max_events=150)
            frames_t = int(rng.integers(1, 4))
            depth = int(rng.integers(1, 10))
            stack = binary_event_images(s, frames_t * depth)
            expected = brute_pack(stack.frames, depth)
            got = np.stack([f.values for f in bina_rep(s, frames_t, depth)])
            assert np.array_equal(got, expected.astype(np.uint32))

    def test_duplicates_change_nothing(self):
        rng = np.random.default_rng(13)
        s = random_stream(rng)
        doubled = EventStream.from_arrays(
            s.geometry, np.repeat(s.x, 2), np.repeat(s.y, 2),
            np.repeat(s.t, 2), np.repeat(s.p, 2),
        )
        a = np.stack([f.values for f in bina_rep(s, 2, 4)])
        b = np.stack([f.values for f in bina_rep(doubled, 2, 4)])
        assert np.array_equal(a, b)

    def test_nonzero_mask_matches_plain_frames(self):
        # a packed pixel is nonzero exactly when its frame window saw an event
        rng = np.random.default_rng(17)
        for _ in range(10):
            s = random_stream(rng, min_events=5)
            packed = np.stack([f.values for f in bina_rep(s, 5, 8)])
            plain = binary_event_images(s, 5).frames
            assert np.array_equal(packed != 0, plain)

    def test_total_popcount_bounded_by_event_count(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            s = random_stream(rng)
            packed = np.stack([f.values for f in bina_rep(s, 2, 8)])
            bits = int(np.bitwise_count(packed.astype(np.uint64)).sum())
            assert 1 <= bits <= len(s)

    def test_default_bit_depth_is_eight(self):
        s = single_pixel_stream({0}, 8)
        assert bina_rep(s, 1)[0].bit_depth == 8

    @pytest.mark.parametrize("depth", [0, -1, 33])
    def test_bit_depth_range_enforced(self, depth):
        s = single_pixel_stream({0}, 8)
        with pytest.raises(ValueError):
            bina_rep(s, 1, depth)

    def test_empty_stream_rejected(self):
        with pytest.raises(EmptyStreamError):
            bina_rep(EventStream.empty(GEOM), 1, 8)


class TestEventHistogram:
    def test_counts_per_pixel_and_polarity(self):
        s = EventStream.from_arrays(
            GEOM, [1, 1, 2], [1, 1, 2], [0, 5, 9], [1, 1, -1]
        )
        tensor = event_histogram(s)
        assert tensor.data.shape == (2, 34, 34)
        assert tensor.data.dtype == np.float32
        assert tensor.data[1, 1, 1] == 2  # two On events at (1,1)
        assert tensor.data[0, 2, 2] == 1  # one Off event at (2,2)
        assert tensor.data.sum() == 3

    def test_empty_stream_gives_zero_counts(self):
        tensor = event_histogram(EventStream.empty(GEOM))
        assert tensor.data.sum() == 0

    def test_layout(self):
        tensor = event_histogram(EventStream.from_arrays(GEOM, [0], [0], [0], [1]))
        assert tensor.layout.kind == "histogram"
        assert tensor.layout.channels == ("off", "on")
        assert tensor.num_channels == 2

    def test_matches_brute_tally(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            s = random_stream(rng)
            expected = np.zeros((2, s.geometry.height, s.geometry.width))
            for e in s:
                expected[(e.p + 1) // 2, e.y, e.x] += 1
            assert np.array_equal(event_histogram(s).data, expected)

    def test_total_equals_event_count(self):
        rng = np.random.default_rng(29)
        s = random_stream(rng)
        assert event_histogram(s).data.sum() == len(s)


class TestVoxelGrid:
    def test_single_event_fills_bin_zero(self):
        s = EventStream.from_arrays(GEOM, [3], [4], [100], [1])
        tensor = voxel_grid(s, 5)
        assert tensor.data.shape == (5, 34, 34)
        assert tensor.data[0, 4, 3] == 1.0
        assert tensor.data.sum() == 1.0

    def test_off_event_contributes_negative(self):
        s = EventStream.from_arrays(GEOM, [3], [4], [100], [-1])
        tensor = voxel_grid(s, 5)
        assert tensor.data[0, 4, 3] == -1.0

    def test_fractional_position_splits_weight(self):
        # t* = 9 * 25 / 90 = 2.5: half the polarity in bin 2, half in bin 3
        s = EventStream.from_arrays(GEOM, [0, 1, 2], [0, 0, 0], [0, 25, 90], [1, 1, 1])
        data = voxel_grid(s, 10).data
        assert data[0, 0, 0] == 1.0
        assert data[2, 0, 1] == pytest.approx(0.5)
        assert data[3, 0, 1] == pytest.approx(0.5)
        assert data[9, 0, 2] == 1.0

    def test_integer_position_keeps_full_weight(self):
        s = EventStream.from_arrays(GEOM, [0, 1, 2], [0] * 3, [0, 50, 100], [1, 1, 1])
        data = voxel_grid(s, 3).data  # t* = 0, 1, 2 exactly
        for b, x in [(0, 0), (1, 1), (2, 2)]:
            assert data[b, 0, x] == 1.0

    def test_opposite_polarities_cancel(self):
        s = EventStream.from_arrays(GEOM, [0, 0], [0, 0], [10, 10], [1, -1])
        assert voxel_grid(s, 4).data.sum() == 0.0

    def test_single_bin_collects_everything(self):
        s = EventStream.from_arrays(GEOM, [0, 0, 0], [0] * 3, [0, 5, 9], [1, 1, -1])
        data = voxel_grid(s, 1).data
        assert data.shape == (1, 34, 34)
        assert data[0, 0, 0] == 1.0  # +1 +1 -1

    def test_signed_mass_is_conserved(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            s = random_stream(rng)
            data = voxel_grid(s, 10).data
            assert float(data.sum()) == pytest.approx(float(s.p.sum()), rel=1e-5, abs=1e-4)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(37)
        for _ in range(15):
            s = random_stream(rng, max_events=100)
            bins = int(rng.integers(1, 11))
            assert np.allclose(voxel_grid(s, bins).data, brute_voxel(s, bins), atol=1e-4)

    def test_layout(self):
        s = EventStream.from_arrays(GEOM, [0], [0], [0], [1])
        tensor = voxel_grid(s, 3)
        assert tensor.layout.kind == "voxel"
        assert tensor.layout.channels == ("bin0", "bin1", "bin2")

    def test_empty_stream_rejected(self):
        with pytest.raises(EmptyStreamError):
            voxel_grid(EventStream.empty(GEOM), 4)

    def test_nonpositive_bins_rejected(self):
        s = EventStream.from_arrays(GEOM, [0], [0], [0], [1])
        with pytest.raises(ValueError):
            voxel_grid(s, 0)


class TestAssembleTensor:
    def _stream(self, seed=41):
        return random_stream(np.random.default_rng(seed), min_events=20)

    def test_channel_counts_of_studied_configs(self):
        s = self._stream()
        assert voxel_grid(s, 10).num_channels == 10
        assert assemble_tensor(binary_event_images(s, 10)).num_channels == 20
        assert event_histogram(s).num_channels == 2
        assert assemble_tensor(bina_rep(s, 1, 8)).num_channels == 2
        assert assemble_tensor(bina_rep(s, 3, 8)).num_channels == 6

    def test_frame_major_channel_labels(self):
        s = self._stream()
        layout = assemble_tensor(binary_event_images(s, 2)).layout
        assert layout.channels == ("frame0/off", "frame0/on", "frame1/off", "frame1/on")

    def test_frame_major_order(self):
        # T=3, N=2: On event in sub-window 0 -> frame 0 -> channel 0*2+1;
        # Off event in sub-window 4 -> frame 2 -> channel 2*2+0
        s = EventStream.from_arrays(
            GEOM, [2, 3, 0, 0], [0, 0, 0, 0], [0, 4, 0, 5], [1, -1, 1, 1]
        )
        tensor = assemble_tensor(bina_rep(s, 3, 2))
        assert tensor.data[1, 0, 2] == 2  # sub-window 0 is the MSB of frame 0
        assert tensor.data[4, 0, 3] == 2
        assert tensor.data[3, 0, 2] == 0
        assert tensor.data[5, 0, 3] == 0

    def test_binary_values_are_bits(self):
        tensor = assemble_tensor(binary_event_images(self._stream(), 4))
        assert tensor.data.dtype == np.float32
        assert set(np.unique(tensor.data)) <= {0.0, 1.0}

    def test_normalize_scales_packed_values(self):
        s = single_pixel_stream(set(range(8)), 8)
        tensor = assemble_tensor(bina_rep(s, 1, 8), normalize=True)
        assert tensor.data[1, 0, 0] == pytest.approx(1.0)
        saturated = assemble_tensor(bina_rep(s, 1, 8))
        assert saturated.data[1, 0, 0] == 255.0

    def test_mixed_bit_depths_rejected(self):
        a = bina_rep(self._stream(), 1, 8)[0]
        b = BinaRepFrame(a.values.copy(), 4)
        with pytest.raises(ValueError):
            assemble_tensor([a, b])

    def test_unknown_type_rejected(self):
        with pytest.raises(TypeError):
            assemble_tensor("nonsense")

    def test_tensor_passthrough(self):
        tensor = event_histogram(self._stream())
        assert assemble_tensor(tensor) is tensor

    def test_rep_tensor_validation(self):
        with pytest.raises(ValueError):
            RepTensor(np.zeros((2, 2), dtype=np.float32), TensorLayout("x", 1))
        with pytest.raises(ValueError):
            RepTensor(np.zeros((1, 2, 2), dtype=np.float64), TensorLayout("x", 1))


@settings(max_examples=40, deadline=None)
@given(event_streams(min_events=1, max_events=40))
def test_packing_identity_property(s):
    stack = binary_event_images(s, 8)
    packed = bina_rep(s, 2, 4)
    expected = brute_pack(stack.frames, 4)
    got = np.stack([f.values for f in packed])
    assert np.array_equal(got, expected.astype(np.uint32))
