"""Tests for the read-only API over stored runs."""

import math

from django.contrib.auth import get_user_model
from django.test import TestCase
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APITestCase

from competition.models import ExperimentRun, ReplicaResult


def replica_row(index, frac1=0.4):
    return {
        'index': index, 'n': 100, 'N': 125, 'a1': 2, 'a2': 3,
        'n1': int(frac1 * 100), 'n2': 100 - int(frac1 * 100),
        'frac1': frac1, 'frac2': 1 - frac1, 'nu': 5, 'stop': 112,
        'sup_deviation': 0.02, 'qv': math.nan, 'min_growth': 0.3,
        'termination_step': 118,
    }


class RunApiTests(APITestCase):
    """Test Methods:
        setUp: creates a user and two stored runs
        test_authentication_required: anonymous requests are refused
        test_list: runs newest first, paginated, with replica counts
        test_kind_filter: ?kind narrows the list
        test_detail: one run with nested replica rows
        test_replicas: replica rows in index order; 404 for unknown runs
    """

    def setUp(self):
        self.user = get_user_model().objects.create_user(username='analyst', password='testpass123')
        self.ensemble = ExperimentRun.record(
            'ENSEMBLE', {'seed': 7, 'replicas': 3}, {'replicas': 3, 'symmetry_pvalue': math.nan},
            [replica_row(2, 0.7), replica_row(0), replica_row(1, 0.5)],
        )
        self.compete = ExperimentRun.record('COMPETE', {'seed': 8}, {'n1': 40}, [replica_row(0)])

    def test_authentication_required(self):
        response = self.client.get(reverse('api-run-list'))
        self.assertEqual(response.status_code, status.HTTP_403_FORBIDDEN)

    def test_list(self):
        self.client.force_authenticate(user=self.user)
        response = self.client.get(reverse('api-run-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['count'], 2)
        results = response.data['results']
        self.assertEqual([r['id'] for r in results], [self.compete.pk, self.ensemble.pk])
        self.assertEqual(results[1]['replica_count'], 3)
        self.assertNotIn('replicas', results[1])

    def test_kind_filter(self):
        self.client.force_authenticate(user=self.user)
        response = self.client.get(reverse('api-run-list'), {'kind': 'ensemble'})
        self.assertEqual([r['id'] for r in response.data['results']], [self.ensemble.pk])

    def test_detail(self):
        self.client.force_authenticate(user=self.user)
        response = self.client.get(reverse('api-run-detail', args=[self.ensemble.pk]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['seed'], 7)
        self.assertIsNone(response.data['summary']['symmetry_pvalue'])
        self.assertEqual(len(response.data['replicas']), 3)
        self.assertIsNone(response.data['replicas'][0]['qv'])

    def test_replicas(self):
        self.client.force_authenticate(user=self.user)
        response = self.client.get(reverse('api-run-replicas', args=[self.ensemble.pk]))
        self.assertEqual([r['index'] for r in response.data['results']], [0, 1, 2])
        self.assertEqual(response.data['results'][2]['frac1'], 0.7)
        missing = self.client.get(reverse('api-run-replicas', args=[9999]))
        self.assertEqual(missing.status_code, status.HTTP_404_NOT_FOUND)

    def test_read_only(self):
        self.client.force_authenticate(user=self.user)
        response = self.client.post(reverse('api-run-list'), {'kind': 'COMPETE'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)


class ModelTests(TestCase):

    def test_record_stores_replicas(self):
        run = ExperimentRun.record('COMPETE', {'seed': 1}, {}, [replica_row(0)])
        self.assertEqual(str(run), f"Single competition #{run.pk} (seed 1)")
        replica = run.replicas.get()
        self.assertIsNone(replica.qv)
        self.assertEqual(replica.total_edges, 125)
        self.assertEqual(ReplicaResult.objects.count(), 1)
