from gadgetry.rng import Lcg64, instance_stream, random_kernel_instance


def test_lcg_reference_values():
    rng = Lcg64(0)
    assert rng.next() == 1442695040888963407
    assert rng.next() == (1442695040888963407 * 6364136223846793005 + 1442695040888963407) % 2 ** 64
    rng = Lcg64(7)
    first = [rng.below(10) for _ in range(5)]
    rng = Lcg64(7)
    assert [rng.below(10) for _ in range(5)] == first


def test_streams_are_reproducible(norainbow, N):
    tmpl = norainbow.template().structure
    a = list(instance_stream(3, 20, tmpl, 5, 6))
    b = list(instance_stream(3, 20, tmpl, 5, 6))
    assert a == b
    assert all(1 <= len(i.variables) <= 5 and len(i.formula.atoms) <= 6 for i in a)
    assert list(instance_stream(4, 20, tmpl, 5, 6)) != a


def test_kernel_instances(N):
    rng = Lcg64(1)
    for _ in range(10):
        inst = random_kernel_instance(rng, N)
        assert len(inst.variables) == 5
        assert 1 <= len(inst.formula.atoms) <= 40
        assert len(set(inst.formula.atoms)) == len(inst.formula.atoms)
